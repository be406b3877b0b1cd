#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <stdexcept>

#include "fastwave/naive_gen.hpp"
#include "oracles.hpp"

using namespace fastwave;
using fastwave::testing::make_config;
using fastwave::testing::random_signal;

TEST_CASE("one block, four layers: the binary tree has 15 nodes") {
  const Model m = build_model(make_config(1, 4, 2, 2, 1));
  const History h(random_signal(20, 1));
  const NaiveStep s = naive_step(m, h);
  CHECK(s.macs.node_evaluations == 15);
  CHECK(s.macs.multiply_accumulates == 30);
}

TEST_CASE("dependency plan size matches brute-force enumeration") {
  for (int blocks = 1; blocks <= 3; ++blocks)
    for (int layers = 1; layers <= 6; ++layers)
      for (int width : {2, 3, 4})
        for (int base : {2, 3}) {
          const ModelConfig c = make_config(blocks, layers, width, base, 1);
          const auto steady = static_cast<std::int64_t>(receptive_field(c)) + 5;
          CAPTURE(blocks);
          CAPTURE(layers);
          CAPTURE(width);
          CAPTURE(base);
          CHECK(plan_dependencies(c, steady).node_count() == fastwave::testing::brute_force_node_count(c));
        }
}

TEST_CASE("node evaluations per step are 2^L - 1 in steady state") {
  for (int layers = 1; layers <= 10; ++layers) {
    const ModelConfig c = make_config(1, layers, 2, 2, 1);
    const Model m = build_model(c);
    History h(random_signal(receptive_field(c), 2));
    for (int step = 0; step < 5; ++step) {
      const NaiveStep s = naive_step(m, h);
      CHECK(s.macs.node_evaluations == (std::uint64_t{1} << layers) - 1);
      h.append(s.sample);
    }
  }
}

TEST_CASE("zero weights predict zero") {
  const Model m = zero_model(make_config(2, 3, 3, 2, 4));
  CHECK(naive_step(m, History(random_signal(30, 3))).sample == 0.0);
}

TEST_CASE("empty history predicts zero without work") {
  const Model m = build_model(make_config(2, 3, 2, 2, 4));
  const NaiveStep s = naive_step(m, History());
  CHECK(s.sample == 0.0);
  CHECK(s.macs == MacCount{});
}

TEST_CASE("step equals the last oracle output, including short histories") {
  for (const ModelConfig& c : {make_config(1, 4, 2, 2, 1), make_config(2, 3, 3, 2, 4, Activation::linear),
                               make_config(3, 2, 3, 3, 2)}) {
    const Model m = build_model(c);
    const std::vector<double> x = random_signal(receptive_field(c) + 10, 4);
    for (std::size_t n : {std::size_t{1}, std::size_t{2}, std::size_t{5}, x.size()}) {
      const std::vector<double> prefix(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n));
      const double expect = forward_full(m, SampleSequence::scalar(prefix)).values.back();
      CHECK(naive_step(m, History(prefix)).sample == expect);
    }
  }
}

TEST_CASE("teacher-forced steps equal forward_full bit for bit") {
  for (const ModelConfig& c : fastwave::testing::property_grid(500)) {
    const Model m = build_model(c);
    const std::vector<double> x = random_signal(64, c.init_seed);
    const std::vector<double> oracle = forward_full(m, SampleSequence::scalar(x)).values;
    History h;
    bool all_equal = true;
    for (std::size_t t = 0; t < x.size(); ++t) {
      h.append(x[t]);
      all_equal &= naive_step(m, h).sample == oracle[t];
    }
    CAPTURE(c.blocks);
    CAPTURE(c.layers_per_block);
    CAPTURE(c.filter_width);
    CAPTURE(c.hidden_channels);
    CHECK(all_equal);
  }
}

TEST_CASE("naive_step is stateless") {
  const Model m = build_model(make_config(2, 4, 3, 2, 4));
  const History h(random_signal(70, 5));
  const NaiveStep a = naive_step(m, h);
  const NaiveStep b = naive_step(m, h);
  CHECK(std::memcmp(&a.sample, &b.sample, sizeof(double)) == 0);
  CHECK(a.macs == b.macs);
}

TEST_CASE("naive_generate edge cases") {
  const Model m = build_model(make_config(1, 3, 2, 2, 2));
  CHECK(naive_generate(m, SampleSequence::scalar({0.5}), 0).values.empty());

  ModelConfig c = make_config(2, 3, 2, 2, 3, Activation::linear);
  const Model seeded = build_model(c);
  std::vector<LayerWeights> layers(seeded.layers().begin(), seeded.layers().end());
  for (auto& lw : layers) std::fill(lw.bias.begin(), lw.bias.end(), 0.0);
  const Model unbiased(c, layers);
  CHECK(naive_generate(unbiased, SampleSequence::scalar({0.0, 0.0, 0.0}), 12).values ==
        std::vector<double>(12, 0.0));

  CHECK_THROWS_AS(naive_generate(m, SampleSequence(2, 1), 3), std::invalid_argument);
}

TEST_CASE("free run feeds each output back") {
  const Model m = build_model(make_config(1, 3, 2, 2, 2, Activation::tanh, 17));
  const SampleSequence out = naive_generate(m, SampleSequence::scalar({0.5}), 6);
  REQUIRE(out.length() == 6);
  std::vector<double> h = {0.5};
  for (std::size_t i = 0; i < 6; ++i) {
    const double expect = forward_full(m, SampleSequence::scalar(h)).values.back();
    CHECK(out.values[i] == expect);
    h.push_back(expect);
  }
}

TEST_CASE("History rejects non-finite samples") {
  History h;
  CHECK_THROWS_AS(h.append(std::numeric_limits<double>::infinity()), std::invalid_argument);
  CHECK(h.size() == 0);
}
