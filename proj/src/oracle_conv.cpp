#include "fastwave/oracle_conv.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "fastwave/conv_kernel.hpp"

namespace fastwave {

SampleSequence causal_dilated_conv(const SampleSequence& input, const LayerWeights& weights,
                                   std::size_t dilation, Activation activation) {
  if (input.channels != weights.in_channels()) {
    throw std::invalid_argument("causal_dilated_conv: input has " + std::to_string(input.channels) +
                                " channels, layer expects " + std::to_string(weights.in_channels()));
  }
  if (dilation == 0) throw std::invalid_argument("causal_dilated_conv: dilation must be positive");
  for (double v : input.values)
    if (!std::isfinite(v)) throw std::invalid_argument("causal_dilated_conv: non-finite input");

  const std::size_t length = input.length();
  SampleSequence output(weights.out_channels(), length);
  output.start_index = input.start_index;
  const std::vector<double> zeros(input.channels, 0.0);

  for (std::size_t t = 0; t < length; ++t) {
    auto tap = [&](std::size_t k) -> const double* {
      const std::size_t back = k * dilation;
      return back > t ? zeros.data() : input.at(t - back).data();
    };
    evaluate_node(weights, activation, tap, output.at(t).data());
  }
  return output;
}

SampleSequence forward_full(const Model& model, const SampleSequence& input) {
  if (input.channels != 1) throw std::invalid_argument("forward_full: input must be scalar");
  SampleSequence h = input;
  for (std::size_t l = 0; l < model.layer_count(); ++l)
    h = causal_dilated_conv(h, model.layer(l), model.dilation(l), model.config().activation);
  return h;
}

}  // namespace fastwave
