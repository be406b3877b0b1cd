#include "fastwave/model.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace fastwave {

namespace {

constexpr std::string_view kMagic = "fastwave-model";
constexpr int kFormatVersion = 1;

// Queues for a larger receptive field would not fit in memory anyway.
constexpr std::size_t kMaxReceptiveField = std::size_t{1} << 30;

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::linear:
      return "linear";
    case Activation::tanh:
      return "tanh";
  }
  return "unknown";
}

Activation parse_activation(std::string_view name) {
  if (name == "linear") return Activation::linear;
  if (name == "tanh") return Activation::tanh;
  throw std::invalid_argument("unknown activation '" + std::string(name) + "'");
}

void validate(const ModelConfig& config) {
  if (config.blocks < 1) throw std::invalid_argument("blocks must be >= 1");
  if (config.layers_per_block < 1) throw std::invalid_argument("layers_per_block must be >= 1");
  if (config.filter_width < 2) throw std::invalid_argument("filter_width must be >= 2");
  if (config.dilation_base < 2) throw std::invalid_argument("dilation_base must be >= 2");
  if (config.hidden_channels < 1) throw std::invalid_argument("hidden_channels must be >= 1");

  // Accumulate the receptive field in a way that cannot overflow silently.
  const auto w = static_cast<std::size_t>(config.filter_width);
  const auto r = static_cast<std::size_t>(config.dilation_base);
  std::size_t per_block = 0;
  std::size_t d = 1;
  for (int l = 0; l < config.layers_per_block; ++l) {
    per_block += (w - 1) * d;
    if (per_block > kMaxReceptiveField) throw std::invalid_argument("receptive field too large");
    if (l + 1 < config.layers_per_block) d *= r;
  }
  if (per_block * static_cast<std::size_t>(config.blocks) + 1 > kMaxReceptiveField)
    throw std::invalid_argument("receptive field too large");
}

std::vector<std::string> config_warnings(const ModelConfig& config) {
  std::vector<std::string> out;
  if (config.dilation_base < config.filter_width) {
    std::ostringstream ss;
    ss << "dilation_base " << config.dilation_base << " < filter_width " << config.filter_width
       << ": taps of successive layers overlap and the O((w-1) r^L) queue-space bound is not tight";
    out.push_back(ss.str());
  }
  return out;
}

std::size_t total_layers(const ModelConfig& config) {
  return static_cast<std::size_t>(config.blocks) * static_cast<std::size_t>(config.layers_per_block);
}

std::size_t dilation(const ModelConfig& config, std::size_t layer) {
  const std::size_t within = layer % static_cast<std::size_t>(config.layers_per_block);
  std::size_t d = 1;
  for (std::size_t i = 0; i < within; ++i) d *= static_cast<std::size_t>(config.dilation_base);
  return d;
}

std::vector<std::size_t> dilations(const ModelConfig& config) {
  std::vector<std::size_t> out(total_layers(config));
  for (std::size_t l = 0; l < out.size(); ++l) out[l] = dilation(config, l);
  return out;
}

std::size_t in_channels(const ModelConfig& config, std::size_t layer) {
  return layer == 0 ? 1 : static_cast<std::size_t>(config.hidden_channels);
}

std::size_t out_channels(const ModelConfig& config, std::size_t layer) {
  return layer + 1 == total_layers(config) ? 1 : static_cast<std::size_t>(config.hidden_channels);
}

std::size_t receptive_field(const ModelConfig& config) {
  validate(config);
  const auto w = static_cast<std::size_t>(config.filter_width);
  const auto r = static_cast<std::size_t>(config.dilation_base);
  std::size_t geometric = 0;  // (r^L - 1) / (r - 1)
  std::size_t d = 1;
  for (int l = 0; l < config.layers_per_block; ++l) {
    geometric += d;
    d *= r;
  }
  return 1 + static_cast<std::size_t>(config.blocks) * (w - 1) * geometric;
}

LayerWeights zero_layer(std::size_t width, std::size_t in_ch, std::size_t out_ch) {
  LayerWeights lw;
  lw.taps.assign(width, Matrix(out_ch, in_ch));
  lw.bias.assign(out_ch, 0.0);
  return lw;
}

Model::Model(ModelConfig config, std::vector<LayerWeights> layers)
    : config_(config), layers_(std::move(layers)) {
  validate(config_);
  const std::size_t expected = total_layers(config_);
  if (layers_.size() != expected) {
    std::ostringstream ss;
    ss << "model has " << layers_.size() << " layers but config declares " << expected;
    throw std::invalid_argument(ss.str());
  }
  const auto w = static_cast<std::size_t>(config_.filter_width);
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const LayerWeights& lw = layers_[l];
    const std::size_t in = fastwave::in_channels(config_, l);
    const std::size_t out = fastwave::out_channels(config_, l);
    if (lw.taps.size() != w || lw.bias.size() != out) {
      throw std::invalid_argument("layer " + std::to_string(l) + ": wrong tap count or bias length");
    }
    for (const Matrix& m : lw.taps) {
      if (m.rows != out || m.cols != in || m.data.size() != out * in)
        throw std::invalid_argument("layer " + std::to_string(l) + ": tap matrix has wrong shape");
      for (double v : m.data)
        if (!std::isfinite(v)) throw std::invalid_argument("layer " + std::to_string(l) + ": non-finite weight");
    }
    for (double v : lw.bias)
      if (!std::isfinite(v)) throw std::invalid_argument("layer " + std::to_string(l) + ": non-finite bias");
  }
  dilations_ = fastwave::dilations(config_);
}

Model build_model(const ModelConfig& config) {
  validate(config);
  std::mt19937_64 rng(config.init_seed);
  std::uniform_real_distribution<double> dist(-0.5, 0.5);
  const auto w = static_cast<std::size_t>(config.filter_width);
  std::vector<LayerWeights> layers;
  layers.reserve(total_layers(config));
  for (std::size_t l = 0; l < total_layers(config); ++l) {
    LayerWeights lw = zero_layer(w, in_channels(config, l), out_channels(config, l));
    for (Matrix& m : lw.taps)
      for (double& v : m.data) v = dist(rng);
    for (double& v : lw.bias) v = dist(rng);
    layers.push_back(std::move(lw));
  }
  return Model(config, std::move(layers));
}

Model zero_model(const ModelConfig& config) {
  validate(config);
  std::vector<LayerWeights> layers;
  for (std::size_t l = 0; l < total_layers(config); ++l)
    layers.push_back(zero_layer(static_cast<std::size_t>(config.filter_width), in_channels(config, l),
                                out_channels(config, l)));
  return Model(config, std::move(layers));
}

// Format:
//   fastwave-model 1
//   blocks <n>            (one "key value" line per config field)
//   ...
//   layer <index> <in_channels> <out_channels>
//   tap <k>
//   <row 0 values>        (out_channels rows of in_channels values)
//   ...
//   bias
//   <out_channels values>
//   end
void save_model(const Model& model, std::ostream& out) {
  const ModelConfig& c = model.config();
  out << kMagic << ' ' << kFormatVersion << '\n';
  out << "blocks " << c.blocks << '\n';
  out << "layers_per_block " << c.layers_per_block << '\n';
  out << "filter_width " << c.filter_width << '\n';
  out << "dilation_base " << c.dilation_base << '\n';
  out << "hidden_channels " << c.hidden_channels << '\n';
  out << "activation " << to_string(c.activation) << '\n';
  out << "init_seed " << c.init_seed << '\n';
  for (std::size_t l = 0; l < model.layer_count(); ++l) {
    const LayerWeights& lw = model.layer(l);
    out << "layer " << l << ' ' << lw.in_channels() << ' ' << lw.out_channels() << '\n';
    for (std::size_t k = 0; k < lw.taps.size(); ++k) {
      out << "tap " << k << '\n';
      const Matrix& m = lw.taps[k];
      for (std::size_t r = 0; r < m.rows; ++r) {
        for (std::size_t col = 0; col < m.cols; ++col) {
          if (col) out << ' ';
          out << format_double(m(r, col));
        }
        out << '\n';
      }
    }
    out << "bias\n";
    for (std::size_t o = 0; o < lw.bias.size(); ++o) {
      if (o) out << ' ';
      out << format_double(lw.bias[o]);
    }
    out << "\nend\n";
  }
  if (!out) throw std::runtime_error("failed to write model");
}

void save_model(const Model& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  save_model(model, out);
}

namespace {

class Tokenizer {
 public:
  explicit Tokenizer(std::istream& in) : in_(in) {}

  bool next(std::string& tok) { return static_cast<bool>(in_ >> tok); }

  std::string word() {
    std::string tok;
    if (!next(tok)) throw std::runtime_error("model file: unexpected end of document");
    return tok;
  }

  void expect(std::string_view keyword) {
    const std::string tok = word();
    if (tok != keyword)
      throw std::runtime_error("model file: expected '" + std::string(keyword) + "', got '" + tok + "'");
  }

  template <typename T>
  T integer() {
    const std::string tok = word();
    T v{};
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size())
      throw std::runtime_error("model file: bad integer '" + tok + "'");
    return v;
  }

  double real() {
    const std::string tok = word();
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size())
      throw std::runtime_error("model file: bad number '" + tok + "'");
    return v;
  }

 private:
  std::istream& in_;
};

}  // namespace

Model load_model(std::istream& in) {
  Tokenizer tok(in);
  tok.expect(kMagic);
  if (tok.integer<int>() != kFormatVersion) throw std::runtime_error("model file: unsupported version");

  ModelConfig c;
  tok.expect("blocks");
  c.blocks = tok.integer<int>();
  tok.expect("layers_per_block");
  c.layers_per_block = tok.integer<int>();
  tok.expect("filter_width");
  c.filter_width = tok.integer<int>();
  tok.expect("dilation_base");
  c.dilation_base = tok.integer<int>();
  tok.expect("hidden_channels");
  c.hidden_channels = tok.integer<int>();
  tok.expect("activation");
  c.activation = parse_activation(tok.word());
  tok.expect("init_seed");
  c.init_seed = tok.integer<std::uint64_t>();
  validate(c);

  std::vector<LayerWeights> layers;
  std::string word;
  while (tok.next(word)) {
    if (word != "layer") throw std::runtime_error("model file: expected 'layer', got '" + word + "'");
    const auto index = tok.integer<std::size_t>();
    if (index != layers.size()) throw std::runtime_error("model file: layers out of order");
    const auto in_ch = tok.integer<std::size_t>();
    const auto out_ch = tok.integer<std::size_t>();
    // Shapes beyond the config are rejected by Model; this only bounds allocation.
    if (in_ch > static_cast<std::size_t>(c.hidden_channels) + 1 ||
        out_ch > static_cast<std::size_t>(c.hidden_channels) + 1)
      throw std::invalid_argument("model file: layer " + std::to_string(index) + " dimensions exceed config");
    LayerWeights lw = zero_layer(static_cast<std::size_t>(c.filter_width), in_ch, out_ch);
    for (std::size_t k = 0; k < lw.taps.size(); ++k) {
      tok.expect("tap");
      if (tok.integer<std::size_t>() != k) throw std::runtime_error("model file: taps out of order");
      for (double& v : lw.taps[k].data) v = tok.real();
    }
    tok.expect("bias");
    for (double& v : lw.bias) v = tok.real();
    tok.expect("end");
    layers.push_back(std::move(lw));
  }
  return Model(c, std::move(layers));
}

Model load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model file '" + path.string() + "'");
  return load_model(in);
}

}  // namespace fastwave
