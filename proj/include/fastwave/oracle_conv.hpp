#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fastwave/model.hpp"

namespace fastwave {

// Time-major sequence of channel vectors. Entry t lives at values[t * channels].
struct SampleSequence {
  std::size_t channels = 1;
  std::vector<double> values;
  std::int64_t start_index = 0;

  SampleSequence() = default;
  SampleSequence(std::size_t ch, std::size_t length) : channels(ch), values(ch * length, 0.0) {}

  static SampleSequence scalar(std::vector<double> samples) {
    SampleSequence s;
    s.values = std::move(samples);
    return s;
  }

  std::size_t length() const { return channels == 0 ? 0 : values.size() / channels; }
  std::span<const double> at(std::size_t t) const { return {values.data() + t * channels, channels}; }
  std::span<double> at(std::size_t t) { return {values.data() + t * channels, channels}; }

  bool operator==(const SampleSequence&) const = default;
};

// output[t] = act(bias + sum_k taps[k] * input[t - k * dilation]), zero padded
// before the first element. Throws std::invalid_argument on channel mismatch.
SampleSequence causal_dilated_conv(const SampleSequence& input, const LayerWeights& weights,
                                   std::size_t dilation, Activation activation);

// Whole-sequence evaluation of the stack, bottom to top. Input must be scalar.
SampleSequence forward_full(const Model& model, const SampleSequence& input);

}  // namespace fastwave
