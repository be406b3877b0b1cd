#include "fastwave/fast_gen.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace fastwave {

ConvQueue::ConvQueue(std::size_t capacity, std::size_t channels)
    : storage_(capacity * channels, 0.0), capacity_(capacity), channels_(channels), size_(capacity) {
  if (capacity == 0 || channels == 0) throw std::invalid_argument("ConvQueue: capacity and channels must be positive");
}

std::span<const double> ConvQueue::at(std::size_t i) const {
  if (i >= size_) throw std::out_of_range("ConvQueue::at: index " + std::to_string(i) + " out of range");
  const std::size_t slot = (head_ + i) % capacity_;
  return {storage_.data() + slot * channels_, channels_};
}

void ConvQueue::pop_front() {
  if (size_ == 0) throw std::logic_error("ConvQueue: pop from empty queue");
  head_ = (head_ + 1) % capacity_;
  --size_;
}

void ConvQueue::push_back(std::span<const double> entry) {
  if (size_ == capacity_) throw std::logic_error("ConvQueue: push to full queue");
  if (entry.size() != channels_) throw std::invalid_argument("ConvQueue: entry has wrong channel count");
  const std::size_t slot = (head_ + size_) % capacity_;
  std::copy(entry.begin(), entry.end(), storage_.begin() + static_cast<std::ptrdiff_t>(slot * channels_));
  ++size_;
}

RecurrentInputs RecurrentInputs::for_model(const Model& model) {
  RecurrentInputs rec;
  const std::size_t w = static_cast<std::size_t>(model.config().filter_width);
  rec.past_taps = w - 1;
  for (const LayerWeights& lw : model.layers()) rec.layers.emplace_back((w - 1) * lw.in_channels(), 0.0);
  return rec;
}

std::span<const double> RecurrentInputs::tap(std::size_t layer, std::size_t k) const {
  const std::vector<double>& v = layers[layer];
  const std::size_t in_ch = v.size() / past_taps;
  return {v.data() + (k - 1) * in_ch, in_ch};
}

NewStates NewStates::for_model(const Model& model) {
  NewStates s;
  for (const LayerWeights& lw : model.layers()) s.layers.emplace_back(lw.in_channels(), 0.0);
  return s;
}

GenerationState::GenerationState(const Model& model)
    : dilations_(model.dilations().begin(), model.dilations().end()),
      width_(static_cast<std::size_t>(model.config().filter_width)),
      rec_(RecurrentInputs::for_model(model)),
      next_(NewStates::for_model(model)) {
  queues_.reserve(model.layer_count());
  for (std::size_t l = 0; l < model.layer_count(); ++l)
    queues_.emplace_back((width_ - 1) * dilations_[l], model.layer(l).in_channels());
}

std::size_t GenerationState::cached_scalars() const {
  std::size_t n = 0;
  for (const ConvQueue& q : queues_) n += q.size() * q.channels();
  return n;
}

GenerationState init_state(const Model& model) { return GenerationState(model); }

void pop_phase(GenerationState& state, RecurrentInputs& out) {
  const std::size_t past = state.width_ - 1;
  if (out.layers.size() != state.queues_.size() || out.past_taps != past)
    throw std::invalid_argument("pop_phase: recurrent input buffer does not match state");
  for (std::size_t l = 0; l < state.queues_.size(); ++l) {
    if (!state.queues_[l].full())
      throw std::logic_error("pop_phase: queue " + std::to_string(l) + " is not at capacity (missed push)");
    if (out.layers[l].size() != past * state.queues_[l].channels())
      throw std::invalid_argument("pop_phase: recurrent input has wrong size");
  }

  for (std::size_t l = 0; l < state.queues_.size(); ++l) {
    ConvQueue& q = state.queues_[l];
    const std::size_t d = state.dilations_[l];
    std::vector<double>& dst = out.layers[l];
    // Queue holds inputs for times t-(w-1)d .. t-1, oldest first, so the
    // input at t - k*d sits at index (w-1-k)*d. Tap w-1 is the front.
    for (std::size_t k = 1; k <= past; ++k) {
      const std::span<const double> entry = q.at((past - k) * d);
      std::copy(entry.begin(), entry.end(), dst.begin() + static_cast<std::ptrdiff_t>((k - 1) * q.channels()));
    }
    q.pop_front();
  }
}

RecurrentInputs pop_phase(GenerationState& state) {
  RecurrentInputs rec;
  rec.past_taps = state.filter_width() - 1;
  for (const ConvQueue& q : state.queues()) rec.layers.emplace_back(rec.past_taps * q.channels(), 0.0);
  pop_phase(state, rec);
  return rec;
}

CellResult compute_step(const Model& model, double input, const RecurrentInputs& rec, NewStates& out) {
  const std::size_t layers = model.layer_count();
  const std::size_t past = static_cast<std::size_t>(model.config().filter_width) - 1;
  if (rec.layers.size() != layers || out.layers.size() != layers || rec.past_taps != past)
    throw std::invalid_argument("compute_step: buffers do not match model");

  const Activation act = model.config().activation;
  CellResult result;
  out.layers[0].assign(1, input);
  for (std::size_t l = 0; l < layers; ++l) {
    const LayerWeights& weights = model.layer(l);
    const std::size_t in_ch = weights.in_channels();
    if (rec.layers[l].size() != past * in_ch || out.layers[l].size() != in_ch)
      throw std::invalid_argument("compute_step: layer " + std::to_string(l) + " dimension mismatch");
    const double* current = out.layers[l].data();
    const double* history = rec.layers[l].data();
    auto tap = [&](std::size_t k) -> const double* { return k == 0 ? current : history + (k - 1) * in_ch; };
    double* dst = l + 1 < layers ? out.layers[l + 1].data() : &out.output;
    evaluate_node(weights, act, tap, dst);
    result.macs += node_cost(weights);
  }
  result.output = out.output;
  return result;
}

void push_phase(GenerationState& state, const NewStates& new_states) {
  if (new_states.layers.size() != state.queues_.size())
    throw std::invalid_argument("push_phase: new states do not match state");
  for (std::size_t l = 0; l < state.queues_.size(); ++l) {
    const ConvQueue& q = state.queues_[l];
    if (q.size() + 1 != q.capacity())
      throw std::logic_error("push_phase: queue " + std::to_string(l) + " is not one short of capacity (missed pop)");
    if (new_states.layers[l].size() != q.channels())
      throw std::invalid_argument("push_phase: layer " + std::to_string(l) + " state has wrong size");
  }
  for (std::size_t l = 0; l < state.queues_.size(); ++l) state.queues_[l].push_back(new_states.layers[l]);
  ++state.step_index_;
}

double fast_step(GenerationState& state, double input, const Model& model) {
  if (state.queues_.size() != model.layer_count()) throw std::invalid_argument("fast_step: state built for another model");
  pop_phase(state, state.rec_);
  const CellResult cell = compute_step(model, input, state.rec_, state.next_);
  push_phase(state, state.next_);
  state.last_macs_ = cell.macs;
  return cell.output;
}

SampleSequence fast_generate(const Model& model, const SampleSequence& primer, std::size_t steps) {
  if (primer.channels != 1) throw std::invalid_argument("fast_generate: primer must be scalar");
  GenerationState state = init_state(model);
  double next = 0.0;
  for (double x : primer.values) next = fast_step(state, x, model);

  SampleSequence out(1, 0);
  out.values.reserve(steps);
  for (std::size_t i = 0; i < steps; ++i) {
    if (i > 0) next = fast_step(state, out.values.back(), model);
    out.values.push_back(next);
  }
  return out;
}

}  // namespace fastwave
