#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fastwave/conv_kernel.hpp"
#include "fastwave/model.hpp"
#include "fastwave/oracle_conv.hpp"

namespace fastwave {

// Fixed-capacity FIFO of channel vectors backed by a ring buffer.
// Entry 0 is the oldest. Starts full of zeros.
class ConvQueue {
 public:
  ConvQueue(std::size_t capacity, std::size_t channels);

  std::size_t capacity() const { return capacity_; }
  std::size_t channels() const { return channels_; }
  std::size_t size() const { return size_; }
  bool full() const { return size_ == capacity_; }

  std::span<const double> at(std::size_t i) const;
  std::span<const double> front() const { return at(0); }

  // Throws std::logic_error when empty / full respectively.
  void pop_front();
  void push_back(std::span<const double> entry);

 private:
  std::vector<double> storage_;
  std::size_t capacity_;
  std::size_t channels_;
  std::size_t head_ = 0;
  std::size_t size_ = 0;
};

// Per layer, the w-1 past layer inputs needed by taps 1..w-1, packed
// tap-major: tap k occupies [(k-1) * in_ch, k * in_ch).
struct RecurrentInputs {
  std::vector<std::vector<double>> layers;
  std::size_t past_taps = 1;  // w - 1

  static RecurrentInputs for_model(const Model& model);
  std::span<const double> tap(std::size_t layer, std::size_t k) const;
};

// layers[l] is the input layer l consumed at tap 0 this step; it is what gets
// cached in queue l. output is the top-layer value.
struct NewStates {
  std::vector<std::vector<double>> layers;
  double output = 0.0;

  static NewStates for_model(const Model& model);
};

// One generation session: queue l feeds layer l and holds (w-1) * dilation(l)
// past inputs of that layer. Not safe for concurrent mutation.
class GenerationState {
 public:
  explicit GenerationState(const Model& model);

  std::span<const ConvQueue> queues() const { return queues_; }
  std::uint64_t step_index() const { return step_index_; }
  std::size_t filter_width() const { return width_; }

  // Total scalars held across all queues.
  std::size_t cached_scalars() const;

  // Cost of the most recent fast_step.
  const MacCount& last_step_macs() const { return last_macs_; }

 private:
  friend void pop_phase(GenerationState&, RecurrentInputs&);
  friend void push_phase(GenerationState&, const NewStates&);
  friend double fast_step(GenerationState&, double, const Model&);

  std::vector<ConvQueue> queues_;
  std::vector<std::size_t> dilations_;
  std::size_t width_;
  std::uint64_t step_index_ = 0;
  RecurrentInputs rec_;
  NewStates next_;
  MacCount last_macs_;
};

// Every queue filled to capacity with zero vectors; step_index 0.
GenerationState init_state(const Model& model);

// Reads the w-1 tap values from every queue, then drops each queue's oldest
// entry. Throws std::logic_error (and changes nothing) unless every queue is
// at capacity.
void pop_phase(GenerationState& state, RecurrentInputs& out);
RecurrentInputs pop_phase(GenerationState& state);

struct CellResult {
  double output = 0.0;
  MacCount macs;
};

// One step of the stack viewed as a multi-layer recurrent cell.
CellResult compute_step(const Model& model, double input, const RecurrentInputs& rec, NewStates& out);

// Appends new_states.layers[l] to queue l and advances step_index. Throws
// std::logic_error (and changes nothing) unless every queue is exactly one
// short of capacity.
void push_phase(GenerationState& state, const NewStates& new_states);

// pop_phase, compute_step, push_phase. Allocation free.
double fast_step(GenerationState& state, double input, const Model& model);

// Feeds the primer through fast_step, then free-runs `steps` samples. The
// first generated sample is the output produced by the last primer sample
// (0.0 for an empty primer, matching naive_step on an empty history).
SampleSequence fast_generate(const Model& model, const SampleSequence& primer, std::size_t steps);

}  // namespace fastwave
