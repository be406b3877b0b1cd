#include "fastwave/naive_gen.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fastwave {

History::History(std::span<const double> primer) {
  samples_.reserve(primer.size());
  for (double v : primer) append(v);
}

void History::append(double sample) {
  if (!std::isfinite(sample)) throw std::invalid_argument("History: non-finite sample");
  samples_.push_back(sample);
}

std::uint64_t DependencyPlan::node_count() const {
  std::uint64_t n = 0;
  for (const auto& layer : times) n += layer.size();
  return n;
}

DependencyPlan plan_dependencies(const ModelConfig& config, std::int64_t output_time) {
  const std::size_t layers = total_layers(config);
  const auto width = static_cast<std::int64_t>(config.filter_width);
  DependencyPlan plan;
  plan.times.resize(layers);
  if (output_time < 0) return plan;

  plan.times[layers - 1].push_back(output_time);
  for (std::size_t l = layers - 1; l > 0; --l) {
    const auto d = static_cast<std::int64_t>(dilation(config, l));
    auto& below = plan.times[l - 1];
    below.reserve(plan.times[l].size() * static_cast<std::size_t>(width));
    for (std::int64_t s : plan.times[l])
      for (std::int64_t k = 0; k < width; ++k)
        if (s - k * d >= 0) below.push_back(s - k * d);
    std::sort(below.begin(), below.end());
    below.erase(std::unique(below.begin(), below.end()), below.end());
  }
  return plan;
}

NaiveStep naive_step(const Model& model, const History& history) {
  NaiveStep result;
  if (history.size() == 0) return result;

  const auto output_time = static_cast<std::int64_t>(history.size()) - 1;
  const DependencyPlan plan = plan_dependencies(model.config(), output_time);
  const Activation act = model.config().activation;
  const std::span<const double> input = history.samples();

  std::vector<std::vector<double>> outputs(model.layer_count());
  const std::vector<double> zeros(static_cast<std::size_t>(model.config().hidden_channels), 0.0);

  for (std::size_t l = 0; l < model.layer_count(); ++l) {
    const LayerWeights& weights = model.layer(l);
    const auto d = static_cast<std::int64_t>(model.dilation(l));
    const std::size_t in_ch = weights.in_channels();
    const std::size_t out_ch = weights.out_channels();
    const auto& times = plan.times[l];
    outputs[l].resize(times.size() * out_ch);

    for (std::size_t n = 0; n < times.size(); ++n) {
      const std::int64_t s = times[n];
      auto tap = [&](std::size_t k) -> const double* {
        const std::int64_t src = s - static_cast<std::int64_t>(k) * d;
        if (src < 0) return zeros.data();
        if (l == 0) return input.data() + src;
        const auto& below = plan.times[l - 1];
        const auto it = std::lower_bound(below.begin(), below.end(), src);
        return outputs[l - 1].data() + static_cast<std::size_t>(it - below.begin()) * in_ch;
      };
      evaluate_node(weights, act, tap, outputs[l].data() + n * out_ch);
      result.macs += node_cost(weights);
    }
  }
  result.sample = outputs.back().front();
  return result;
}

SampleSequence naive_generate(const Model& model, const SampleSequence& primer, std::size_t steps) {
  if (primer.channels != 1) throw std::invalid_argument("naive_generate: primer must be scalar");
  History history(primer.values);
  SampleSequence out(1, 0);
  out.values.reserve(steps);
  for (std::size_t i = 0; i < steps; ++i) {
    const double next = naive_step(model, history).sample;
    out.values.push_back(next);
    history.append(next);
  }
  return out;
}

}  // namespace fastwave
