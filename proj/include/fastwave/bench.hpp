#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "fastwave/conv_kernel.hpp"
#include "fastwave/model.hpp"

namespace fastwave {

enum class Mode { naive, fast };

std::string_view to_string(Mode m);
Mode parse_mode(std::string_view name);

// Exact per-step cost. For naive this is the steady state (history at least
// one receptive field long); for fast it is the same at every step.
MacCount count_macs(const ModelConfig& config, Mode mode);

struct TimingRecord {
  Mode mode = Mode::fast;
  int blocks = 0;
  int layers = 0;
  int filter_width = 0;
  int dilation_base = 0;
  int channels = 0;
  std::uint64_t steps = 0;
  std::uint64_t repeats = 0;
  double mean_s_per_sample = 0.0;
  double std_s_per_sample = 0.0;
  std::uint64_t macs_per_step = 0;
  std::uint64_t node_evals_per_step = 0;
  // False when the run was aborted by the wall-clock budget.
  bool completed = true;

  bool operator==(const TimingRecord&) const = default;
};

struct BenchOptions {
  std::uint64_t steps = 64;
  std::uint64_t repeats = 100;
  std::uint64_t warmup = 3;
  // Per config and mode; <= 0 disables the budget.
  double budget_seconds = 0.0;
  std::uint64_t primer_seed = 1;
};

// blocks x {layers_from..layers_to}, C channels, w = r = 2, tanh.
std::vector<ModelConfig> default_grid(int layers_from = 1, int layers_to = 10, int blocks = 2, int channels = 16);

// For every config and mode: build the seeded model, prime it with one
// receptive field of samples, run `warmup` untimed free runs, then time
// `repeats` free runs of `steps` samples each on a steady clock. Serial.
std::vector<TimingRecord> run_benchmark(std::span<const ModelConfig> grid, const BenchOptions& options);

// CSV with a fixed header; rows sorted by (layers, mode). Throws
// std::invalid_argument on an empty record list.
void emit_records(std::span<const TimingRecord> records, std::ostream& out);
void emit_records(std::span<const TimingRecord> records, const std::filesystem::path& path);

// Inverse of emit_records. Throws std::runtime_error on malformed input.
std::vector<TimingRecord> parse_records(std::istream& in);

}  // namespace fastwave
