#pragma once

#include <cmath>
#include <cstdint>

#include "fastwave/model.hpp"

namespace fastwave {

struct MacCount {
  std::uint64_t multiply_accumulates = 0;
  std::uint64_t node_evaluations = 0;

  MacCount& operator+=(const MacCount& o) {
    multiply_accumulates += o.multiply_accumulates;
    node_evaluations += o.node_evaluations;
    return *this;
  }
  bool operator==(const MacCount&) const = default;
};

inline MacCount node_cost(const LayerWeights& w) {
  return {static_cast<std::uint64_t>(w.width() * w.in_channels() * w.out_channels()), 1};
}

inline double activate(Activation a, double x) { return a == Activation::tanh ? std::tanh(x) : x; }

// The single convolution kernel shared by the oracle and both generators.
// tap(k) returns a pointer to the layer input at time t - k * dilation
// (in_channels values; zeros for the padded region before t = 0).
//
// Accumulation order is fixed: taps ascending, input channels ascending,
// then bias, then activation. Keeping it identical on every path is what
// makes the cross-checks exact.
template <typename TapSource>
inline void evaluate_node(const LayerWeights& weights, Activation act, TapSource&& tap, double* out) {
  const std::size_t width = weights.width();
  const std::size_t in_ch = weights.in_channels();
  const std::size_t out_ch = weights.out_channels();
  for (std::size_t o = 0; o < out_ch; ++o) {
    double acc = 0.0;
    for (std::size_t k = 0; k < width; ++k) {
      const double* x = tap(k);
      const double* row = weights.taps[k].data.data() + o * in_ch;
      for (std::size_t i = 0; i < in_ch; ++i) acc += row[i] * x[i];
    }
    acc += weights.bias[o];
    out[o] = activate(act, acc);
  }
}

}  // namespace fastwave
