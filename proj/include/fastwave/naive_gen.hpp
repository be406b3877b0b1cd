#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fastwave/conv_kernel.hpp"
#include "fastwave/model.hpp"
#include "fastwave/oracle_conv.hpp"

namespace fastwave {

// Append-only record of the scalar samples seen so far in one session.
class History {
 public:
  History() = default;
  explicit History(std::span<const double> primer);

  void append(double sample);
  std::span<const double> samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }

 private:
  std::vector<double> samples_;
};

// For each layer, the sorted distinct non-negative output times that must be
// evaluated to produce the top-layer output at output_time.
struct DependencyPlan {
  std::vector<std::vector<std::int64_t>> times;

  std::uint64_t node_count() const;
};

DependencyPlan plan_dependencies(const ModelConfig& config, std::int64_t output_time);

struct NaiveStep {
  double sample = 0.0;
  MacCount macs;
};

// Predicts the sample that follows history by evaluating, from scratch, every
// node the top output depends on (each distinct node once). Equals the last
// element of forward_full(history). An empty history predicts 0.0 since the
// output node then lies in the zero-padded region.
NaiveStep naive_step(const Model& model, const History& history);

// Seeds a history with primer, then appends `steps` predictions, each one fed
// back as the next input. Returns the generated samples only.
SampleSequence naive_generate(const Model& model, const SampleSequence& primer, std::size_t steps);

}  // namespace fastwave
