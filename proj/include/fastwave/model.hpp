#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fastwave {

enum class Activation { linear, tanh };

std::string_view to_string(Activation a);
Activation parse_activation(std::string_view name);

// Architecture hyperparameters. Layer l of a block (0-indexed) has dilation
// dilation_base^l; dilations restart at 1 for every block.
struct ModelConfig {
  int blocks = 1;
  int layers_per_block = 4;
  int filter_width = 2;
  int dilation_base = 2;
  int hidden_channels = 1;
  Activation activation = Activation::tanh;
  std::uint64_t init_seed = 0;

  bool operator==(const ModelConfig&) const = default;
};

// Throws std::invalid_argument on zero counts, filter_width < 2,
// dilation_base < 2 or an unreasonably large receptive field.
void validate(const ModelConfig& config);

// Non-fatal remarks about a valid config (e.g. dilation_base < filter_width,
// where the usual space bound no longer applies).
std::vector<std::string> config_warnings(const ModelConfig& config);

std::size_t total_layers(const ModelConfig& config);
std::size_t dilation(const ModelConfig& config, std::size_t layer);
std::vector<std::size_t> dilations(const ModelConfig& config);
std::size_t in_channels(const ModelConfig& config, std::size_t layer);
std::size_t out_channels(const ModelConfig& config, std::size_t layer);

// Number of most recent input samples that can influence one output:
// 1 + blocks * (w - 1) * (r^L - 1) / (r - 1).
std::size_t receptive_field(const ModelConfig& config);

// Dense row-major matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

  bool operator==(const Matrix&) const = default;
};

// taps[0] multiplies the current input, taps[k] the input k*dilation steps back.
struct LayerWeights {
  std::vector<Matrix> taps;
  std::vector<double> bias;

  std::size_t width() const { return taps.size(); }
  std::size_t in_channels() const { return taps.empty() ? 0 : taps.front().cols; }
  std::size_t out_channels() const { return bias.size(); }

  bool operator==(const LayerWeights&) const = default;
};

LayerWeights zero_layer(std::size_t width, std::size_t in_ch, std::size_t out_ch);

// Immutable after construction; safe to share between threads.
class Model {
 public:
  // Validates the config and that every layer has the right shape and only
  // finite entries. Throws std::invalid_argument otherwise.
  Model(ModelConfig config, std::vector<LayerWeights> layers);

  const ModelConfig& config() const { return config_; }
  std::span<const LayerWeights> layers() const { return layers_; }
  const LayerWeights& layer(std::size_t l) const { return layers_[l]; }
  std::size_t layer_count() const { return layers_.size(); }
  std::size_t dilation(std::size_t l) const { return dilations_[l]; }
  std::span<const std::size_t> dilations() const { return dilations_; }

  bool operator==(const Model& other) const {
    return config_ == other.config_ && layers_ == other.layers_;
  }

 private:
  ModelConfig config_;
  std::vector<LayerWeights> layers_;
  std::vector<std::size_t> dilations_;
};

// Weights and biases drawn from U[-0.5, 0.5] seeded by config.init_seed.
Model build_model(const ModelConfig& config);

// All taps and biases zero.
Model zero_model(const ModelConfig& config);

// Line-oriented text document; every weight is written with 17 significant
// digits so a save/load round trip is bit-exact.
void save_model(const Model& model, std::ostream& out);
void save_model(const Model& model, const std::filesystem::path& path);

// Throws std::runtime_error on malformed documents and
// std::invalid_argument when the layers do not fit the declared config.
Model load_model(std::istream& in);
Model load_model(const std::filesystem::path& path);

}  // namespace fastwave
