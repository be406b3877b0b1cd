#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <system_error>

#include <CLI11.hpp>

#include "fastwave/bench.hpp"
#include "fastwave/fast_gen.hpp"
#include "fastwave/model.hpp"
#include "fastwave/naive_gen.hpp"
#include "fastwave/oracle_conv.hpp"

namespace fastwave::cli {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string shortest(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string join(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(v[i]);
  }
  return s;
}

std::vector<double> random_signal(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = dist(rng);
  return v;
}

// ---------------------------------------------------------------------------
// init-model

struct InitModelArgs {
  ModelConfig config;
  std::string activation = "tanh";
  std::string out;
};

int cmd_init_model(InitModelArgs& a, std::ostream& out, std::ostream& err) {
  a.config.activation = parse_activation(a.activation);
  validate(a.config);
  for (const std::string& w : config_warnings(a.config)) err << "warning: " << w << '\n';

  const Model model = build_model(a.config);
  save_model(model, std::filesystem::path(a.out));

  std::vector<std::size_t> capacities;
  for (std::size_t d : model.dilations()) capacities.push_back(static_cast<std::size_t>(a.config.filter_width - 1) * d);
  out << "layers: " << model.layer_count() << '\n';
  out << "receptive_field: " << receptive_field(a.config) << '\n';
  out << "queue_capacities: " << join(capacities) << '\n';
  return kSuccess;
}

// ---------------------------------------------------------------------------
// generate

struct GenerateArgs {
  std::string model;
  std::size_t steps = 0;
  std::string mode = "fast";
  std::string primer;
  std::string out;
};

int cmd_generate(const GenerateArgs& a, std::ostream& err) {
  const Mode mode = parse_mode(a.mode);
  const Model model = load_model(std::filesystem::path(a.model));
  SampleSequence primer;
  if (!a.primer.empty()) primer = SampleSequence::scalar(read_samples(a.primer));

  const auto start = std::chrono::steady_clock::now();
  const SampleSequence generated =
      mode == Mode::fast ? fast_generate(model, primer, a.steps) : naive_generate(model, primer, a.steps);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  write_samples(generated.values, a.out);

  const MacCount cost = count_macs(model.config(), mode);
  err << "mode: " << to_string(mode) << '\n';
  err << "steps_per_sec: " << (seconds > 0.0 ? static_cast<double>(a.steps) / seconds : 0.0) << '\n';
  err << "macs_per_step: " << cost.multiply_accumulates << '\n';
  return kSuccess;
}

// ---------------------------------------------------------------------------
// verify

struct VerifyArgs {
  std::string model;
  bool random_grid = false;
  std::size_t steps = 64;
  double tol = 0.0;
  std::uint64_t seed = 1;
  std::string primer;
  std::string expect;
};

struct Deviation {
  double max_abs = 0.0;
  bool within = true;
};

// Relative tolerance; tol == 0 means exact equality.
Deviation compare(const std::vector<double>& a, const std::vector<double>& b, double tol) {
  Deviation d;
  if (a.size() != b.size()) {
    d.within = false;
    d.max_abs = INFINITY;
    return d;
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = std::abs(a[i] - b[i]);
    d.max_abs = std::max(d.max_abs, diff);
    if (!(diff <= tol * std::max(std::abs(a[i]), std::abs(b[i])))) d.within = false;
  }
  return d;
}

std::string describe(const ModelConfig& c) {
  std::ostringstream ss;
  ss << "blocks=" << c.blocks << " L=" << c.layers_per_block << " w=" << c.filter_width << " r=" << c.dilation_base
     << " C=" << c.hidden_channels << " act=" << to_string(c.activation);
  return ss.str();
}

bool verify_model(const Model& model, const VerifyArgs& a, const std::vector<double>& primer,
                  const std::vector<double>* expected, std::ostream& out, std::ostream& err) {
  const std::vector<double> input = random_signal(a.steps, a.seed);
  const std::vector<double> oracle = forward_full(model, SampleSequence::scalar(input)).values;

  std::vector<double> fast_tf;
  GenerationState state = init_state(model);
  for (double x : input) fast_tf.push_back(fast_step(state, x, model));

  std::vector<double> naive_tf;
  History history;
  for (double x : input) {
    history.append(x);
    naive_tf.push_back(naive_step(model, history).sample);
  }

  const SampleSequence p = SampleSequence::scalar(primer);
  const std::vector<double> fast_free = fast_generate(model, p, a.steps).values;
  const std::vector<double> naive_free = naive_generate(model, p, a.steps).values;

  std::vector<std::pair<std::string, Deviation>> results = {
      {"teacher_forced fast vs oracle", compare(fast_tf, oracle, a.tol)},
      {"teacher_forced naive vs oracle", compare(naive_tf, oracle, a.tol)},
      {"free_run fast vs naive", compare(fast_free, naive_free, a.tol)},
  };
  if (expected) results.emplace_back("free_run fast vs expected", compare(fast_free, *expected, a.tol));

  bool ok = true;
  for (const auto& [name, dev] : results) {
    out << "  " << name << ": max_abs_dev " << shortest(dev.max_abs) << (dev.within ? " ok" : " MISMATCH") << '\n';
    if (!dev.within) {
      err << "verify: " << describe(model.config()) << ": " << name << " exceeds tolerance " << a.tol << '\n';
      ok = false;
    }
  }
  return ok;
}

std::vector<ModelConfig> verification_grid() {
  std::vector<ModelConfig> grid;
  std::uint64_t seed = 1000;
  for (int blocks = 1; blocks <= 3; ++blocks)
    for (int layers = 1; layers <= 6; ++layers)
      for (int width : {2, 3})
        for (int channels : {1, 4})
          for (Activation act : {Activation::linear, Activation::tanh}) {
            ModelConfig c;
            c.blocks = blocks;
            c.layers_per_block = layers;
            c.filter_width = width;
            c.dilation_base = 2;
            c.hidden_channels = channels;
            c.activation = act;
            c.init_seed = seed++;
            grid.push_back(c);
          }
  return grid;
}

int cmd_verify(const VerifyArgs& a, std::ostream& out, std::ostream& err) {
  if (a.model.empty() == !a.random_grid) throw UsageError("verify: give exactly one of --model or --random-grid");
  if (a.tol < 0.0 || !std::isfinite(a.tol)) throw UsageError("verify: --tol must be a finite non-negative number");
  if (!a.expect.empty() && a.random_grid) throw UsageError("verify: --expect requires --model");

  const std::vector<double> primer = a.primer.empty() ? std::vector<double>{0.5} : read_samples(a.primer);
  std::vector<double> expected;
  if (!a.expect.empty()) expected = read_samples(a.expect);

  bool ok = true;
  if (a.random_grid) {
    for (const ModelConfig& c : verification_grid()) {
      out << describe(c) << '\n';
      ok &= verify_model(build_model(c), a, primer, nullptr, out, err);
    }
  } else {
    const Model model = load_model(std::filesystem::path(a.model));
    out << describe(model.config()) << '\n';
    ok = verify_model(model, a, primer, a.expect.empty() ? nullptr : &expected, out, err);
  }
  out << (ok ? "verify: all comparisons within tolerance" : "verify: FAILED") << '\n';
  return ok ? kSuccess : kVerificationFailed;
}

// ---------------------------------------------------------------------------
// bench

struct BenchArgs {
  int layers_from = 1;
  int layers_to = 10;
  int blocks = 2;
  int channels = 16;
  BenchOptions options;
  std::string out;
};

int cmd_bench(const BenchArgs& a, std::ostream& out, std::ostream& err) {
  if (a.layers_from < 1 || a.layers_to < a.layers_from) throw UsageError("bench: need 1 <= --layers-from <= --layers-to");
  if (a.options.steps < 1 || a.options.repeats < 1) throw UsageError("bench: --steps and --repeats must be >= 1");

  const std::vector<ModelConfig> grid = default_grid(a.layers_from, a.layers_to, a.blocks, a.channels);
  for (const ModelConfig& c : grid) validate(c);

  const std::vector<TimingRecord> all = run_benchmark(grid, a.options);
  std::vector<TimingRecord> done;
  for (const TimingRecord& r : all) {
    if (r.completed)
      done.push_back(r);
    else
      err << "bench: skipped " << to_string(r.mode) << " L=" << r.layers << " (over the "
          << a.options.budget_seconds << " s budget)\n";
  }
  if (done.empty()) throw std::runtime_error("bench: every configuration exceeded the time budget");
  emit_records(done, std::filesystem::path(a.out));

  std::map<int, std::pair<double, double>> by_layers;  // L -> (fast, naive)
  for (const TimingRecord& r : done) {
    auto& slot = by_layers[r.layers];
    (r.mode == Mode::fast ? slot.first : slot.second) = r.mean_s_per_sample;
  }
  out << "L fast/naive\n";
  for (const auto& [layers, t] : by_layers) {
    out << layers << ' ';
    if (t.first > 0.0 && t.second > 0.0)
      out << shortest(t.first / t.second);
    else
      out << "n/a";
    out << '\n';
  }
  return kSuccess;
}

}  // namespace

std::vector<double> read_samples(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open sample file '" + path.string() + "'");
  std::vector<double> samples;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    const std::string_view tok(line.data() + first, last - first + 1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v))
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": malformed sample '" +
                               std::string(tok) + "'");
    samples.push_back(v);
  }
  return samples;
}

void write_samples(const std::vector<double>& samples, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  for (double v : samples) out << shortest(v) << '\n';
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Streaming generation for dilated causal convolution stacks"};
  app.require_subcommand(1);

  InitModelArgs init;
  auto* init_cmd = app.add_subcommand("init-model", "Create a seeded random model file");
  init_cmd->add_option("--layers", init.config.layers_per_block, "Layers per block")->required();
  init_cmd->add_option("--blocks", init.config.blocks, "Number of dilation blocks")->capture_default_str();
  init_cmd->add_option("--width", init.config.filter_width, "Filter width (taps)")->capture_default_str();
  init_cmd->add_option("--base", init.config.dilation_base, "Dilation base")->capture_default_str();
  init_cmd->add_option("--channels", init.config.hidden_channels, "Hidden channels")->capture_default_str();
  init_cmd->add_option("--activation", init.activation, "linear or tanh")->capture_default_str();
  init_cmd->add_option("--seed", init.config.init_seed, "Weight initialization seed")->capture_default_str();
  init_cmd->add_option("--out", init.out, "Model file to write")->required();

  GenerateArgs gen;
  auto* gen_cmd = app.add_subcommand("generate", "Free-run generation from a model");
  gen_cmd->add_option("--model", gen.model, "Model file")->required();
  gen_cmd->add_option("--steps", gen.steps, "Samples to generate")->required();
  gen_cmd->add_option("--mode", gen.mode, "fast or naive")->capture_default_str();
  gen_cmd->add_option("--primer", gen.primer, "Primer sample file");
  gen_cmd->add_option("--out", gen.out, "Output sample file")->required();

  VerifyArgs ver;
  auto* ver_cmd = app.add_subcommand("verify", "Cross-check fast, naive and full-sequence evaluation");
  auto* ver_model = ver_cmd->add_option("--model", ver.model, "Model file");
  auto* ver_grid = ver_cmd->add_flag("--random-grid", ver.random_grid, "Check the built-in seeded config grid");
  ver_model->excludes(ver_grid);
  ver_cmd->add_option("--steps", ver.steps, "Sequence length per comparison")->capture_default_str();
  ver_cmd->add_option("--tol", ver.tol, "Relative tolerance (0 = exact)")->capture_default_str();
  ver_cmd->add_option("--seed", ver.seed, "Seed for the teacher-forcing signal")->capture_default_str();
  ver_cmd->add_option("--primer", ver.primer, "Primer sample file for free runs (default: 0.5)");
  ver_cmd->add_option("--expect", ver.expect, "Expected free-run samples (e.g. from generate)");

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Time naive vs fast generation across layer counts");
  bench_cmd->add_option("--layers-from", bench.layers_from)->capture_default_str();
  bench_cmd->add_option("--layers-to", bench.layers_to)->capture_default_str();
  bench_cmd->add_option("--blocks", bench.blocks)->capture_default_str();
  bench_cmd->add_option("--channels", bench.channels)->capture_default_str();
  bench_cmd->add_option("--repeats", bench.options.repeats)->capture_default_str();
  bench_cmd->add_option("--steps", bench.options.steps)->capture_default_str();
  bench_cmd->add_option("--warmup", bench.options.warmup)->capture_default_str();
  bench_cmd->add_option("--budget", bench.options.budget_seconds, "Per config and mode wall-clock budget in seconds (0 = none)")
      ->capture_default_str();
  bench_cmd->add_option("--out", bench.out, "CSV file to write")->required();

  try {
    std::vector<std::string> reversed(args.begin() + (args.empty() ? 0 : 1), args.end());
    std::reverse(reversed.begin(), reversed.end());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsageError;
  }

  try {
    if (*init_cmd) return cmd_init_model(init, out, err);
    if (*gen_cmd) return cmd_generate(gen, err);
    if (*ver_cmd) return cmd_verify(ver, out, err);
    if (*bench_cmd) return cmd_bench(bench, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  }
  return kUsageError;
}

}  // namespace fastwave::cli
