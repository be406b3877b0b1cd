#include "fastwave/bench.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>

#include "fastwave/fast_gen.hpp"
#include "fastwave/naive_gen.hpp"

namespace fastwave {

namespace {

constexpr std::string_view kCsvHeader =
    "mode,blocks,layers,filter_width,dilation_base,channels,steps,repeats,"
    "mean_s_per_sample,std_s_per_sample,macs_per_step,node_evals_per_step";

using Clock = std::chrono::steady_clock;

std::string shortest(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

template <typename T>
T parse_field(std::string_view s) {
  T v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw std::runtime_error("bench csv: bad field '" + std::string(s) + "'");
  return v;
}

std::vector<double> make_primer(std::size_t length, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-0.5, 0.5);
  std::vector<double> p(length);
  for (double& v : p) v = dist(rng);
  return p;
}

// Keeps the generated samples observable so the loops are not elided.
volatile double g_sink = 0.0;

// Returns seconds for `steps` free-run samples starting from a primed session.
double time_naive_run(const Model& model, const std::vector<double>& primer, std::uint64_t steps) {
  History history(primer);
  const auto start = Clock::now();
  double acc = 0.0;
  for (std::uint64_t i = 0; i < steps; ++i) {
    const double s = naive_step(model, history).sample;
    history.append(s);
    acc += s;
  }
  const auto stop = Clock::now();
  g_sink = acc;
  return std::chrono::duration<double>(stop - start).count();
}

double time_fast_run(const Model& model, const std::vector<double>& primer, std::uint64_t steps) {
  GenerationState state = init_state(model);
  double x = 0.0;
  for (double p : primer) x = fast_step(state, p, model);
  const auto start = Clock::now();
  double acc = 0.0;
  for (std::uint64_t i = 0; i < steps; ++i) {
    x = fast_step(state, x, model);
    acc += x;
  }
  const auto stop = Clock::now();
  g_sink = acc;
  return std::chrono::duration<double>(stop - start).count();
}

}  // namespace

std::string_view to_string(Mode m) { return m == Mode::naive ? "naive" : "fast"; }

Mode parse_mode(std::string_view name) {
  if (name == "naive") return Mode::naive;
  if (name == "fast") return Mode::fast;
  throw std::invalid_argument("unknown mode '" + std::string(name) + "'");
}

MacCount count_macs(const ModelConfig& config, Mode mode) {
  validate(config);
  const auto w = static_cast<std::uint64_t>(config.filter_width);
  const std::size_t layers = total_layers(config);
  MacCount total;
  if (mode == Mode::fast) {
    for (std::size_t l = 0; l < layers; ++l) {
      total.multiply_accumulates += w * in_channels(config, l) * out_channels(config, l);
      ++total.node_evaluations;
    }
    return total;
  }
  const auto steady = static_cast<std::int64_t>(receptive_field(config)) - 1;
  const DependencyPlan plan = plan_dependencies(config, steady);
  for (std::size_t l = 0; l < layers; ++l) {
    const std::uint64_t nodes = plan.times[l].size();
    total.multiply_accumulates += nodes * w * in_channels(config, l) * out_channels(config, l);
    total.node_evaluations += nodes;
  }
  return total;
}

std::vector<ModelConfig> default_grid(int layers_from, int layers_to, int blocks, int channels) {
  std::vector<ModelConfig> grid;
  for (int l = layers_from; l <= layers_to; ++l) {
    ModelConfig c;
    c.blocks = blocks;
    c.layers_per_block = l;
    c.filter_width = 2;
    c.dilation_base = 2;
    c.hidden_channels = channels;
    c.activation = Activation::tanh;
    c.init_seed = static_cast<std::uint64_t>(l);
    grid.push_back(c);
  }
  return grid;
}

std::vector<TimingRecord> run_benchmark(std::span<const ModelConfig> grid, const BenchOptions& options) {
  if (options.steps < 1) throw std::invalid_argument("run_benchmark: steps must be >= 1");
  if (options.repeats < 1) throw std::invalid_argument("run_benchmark: repeats must be >= 1");

  std::vector<TimingRecord> records;
  for (const ModelConfig& config : grid) {
    const Model model = build_model(config);
    const std::vector<double> primer = make_primer(receptive_field(config), options.primer_seed);

    for (Mode mode : {Mode::naive, Mode::fast}) {
      const MacCount cost = count_macs(config, mode);
      TimingRecord rec;
      rec.mode = mode;
      rec.blocks = config.blocks;
      rec.layers = config.layers_per_block;
      rec.filter_width = config.filter_width;
      rec.dilation_base = config.dilation_base;
      rec.channels = config.hidden_channels;
      rec.steps = options.steps;
      rec.repeats = options.repeats;
      rec.macs_per_step = cost.multiply_accumulates;
      rec.node_evals_per_step = cost.node_evaluations;

      auto run = [&] {
        return mode == Mode::naive ? time_naive_run(model, primer, options.steps)
                                   : time_fast_run(model, primer, options.steps);
      };

      const auto budget_start = Clock::now();
      auto over_budget = [&] {
        return options.budget_seconds > 0.0 &&
               std::chrono::duration<double>(Clock::now() - budget_start).count() > options.budget_seconds;
      };

      for (std::uint64_t i = 0; i < options.warmup && rec.completed; ++i) {
        run();
        if (over_budget()) rec.completed = false;
      }

      std::vector<double> per_sample;
      per_sample.reserve(options.repeats);
      for (std::uint64_t i = 0; i < options.repeats && rec.completed; ++i) {
        per_sample.push_back(run() / static_cast<double>(options.steps));
        if (i + 1 < options.repeats && over_budget()) rec.completed = false;
      }

      if (rec.completed) {
        double mean = 0.0;
        for (double v : per_sample) mean += v;
        mean /= static_cast<double>(per_sample.size());
        double var = 0.0;
        for (double v : per_sample) var += (v - mean) * (v - mean);
        var /= static_cast<double>(per_sample.size());
        rec.mean_s_per_sample = mean;
        rec.std_s_per_sample = std::sqrt(var);
      }
      records.push_back(rec);
    }
  }
  return records;
}

void emit_records(std::span<const TimingRecord> records, std::ostream& out) {
  if (records.empty()) throw std::invalid_argument("emit_records: no records");
  std::vector<TimingRecord> sorted(records.begin(), records.end());
  std::stable_sort(sorted.begin(), sorted.end(), [](const TimingRecord& a, const TimingRecord& b) {
    if (a.layers != b.layers) return a.layers < b.layers;
    return to_string(a.mode) < to_string(b.mode);
  });

  out << kCsvHeader << '\n';
  for (const TimingRecord& r : sorted) {
    out << to_string(r.mode) << ',' << r.blocks << ',' << r.layers << ',' << r.filter_width << ','
        << r.dilation_base << ',' << r.channels << ',' << r.steps << ',' << r.repeats << ','
        << shortest(r.mean_s_per_sample) << ',' << shortest(r.std_s_per_sample) << ',' << r.macs_per_step << ','
        << r.node_evals_per_step << '\n';
  }
  if (!out) throw std::runtime_error("emit_records: write failed");
}

void emit_records(std::span<const TimingRecord> records, const std::filesystem::path& path) {
  if (records.empty()) throw std::invalid_argument("emit_records: no records");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  emit_records(records, out);
}

std::vector<TimingRecord> parse_records(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw std::runtime_error("bench csv: missing or wrong header");

  std::vector<TimingRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string_view> f;
    std::string_view rest(line);
    for (;;) {
      const auto comma = rest.find(',');
      f.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (f.size() != 12) throw std::runtime_error("bench csv: expected 12 fields, got " + std::to_string(f.size()));
    TimingRecord r;
    if (f[0] != "naive" && f[0] != "fast") throw std::runtime_error("bench csv: bad mode '" + std::string(f[0]) + "'");
    r.mode = parse_mode(f[0]);
    r.blocks = parse_field<int>(f[1]);
    r.layers = parse_field<int>(f[2]);
    r.filter_width = parse_field<int>(f[3]);
    r.dilation_base = parse_field<int>(f[4]);
    r.channels = parse_field<int>(f[5]);
    r.steps = parse_field<std::uint64_t>(f[6]);
    r.repeats = parse_field<std::uint64_t>(f[7]);
    r.mean_s_per_sample = parse_field<double>(f[8]);
    r.std_s_per_sample = parse_field<double>(f[9]);
    r.macs_per_step = parse_field<std::uint64_t>(f[10]);
    r.node_evals_per_step = parse_field<std::uint64_t>(f[11]);
    records.push_back(r);
  }
  return records;
}

}  // namespace fastwave
