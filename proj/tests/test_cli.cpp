#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "cli.hpp"
#include "fastwave/bench.hpp"
#include "fastwave/model.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace fastwave;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "fastwave");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  out << s;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("fastwave_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

const TempDir& tmp() {
  static TempDir dir;
  return dir;
}

}  // namespace

TEST_CASE("init-model reports receptive field and queue sizes") {
  const auto model = tmp() / "m4.txt";
  const Result r = run({"init-model", "--layers", "4", "--blocks", "1", "--width", "2", "--base", "2", "--channels",
                        "1", "--seed", "7", "--out", model});
  CHECK(r.code == 0);
  CHECK(r.out.find("receptive_field: 16\n") != std::string::npos);
  CHECK(r.out.find("queue_capacities: 1,2,4,8\n") != std::string::npos);
  CHECK(load_model(fs::path(model)).layer_count() == 4);
}

TEST_CASE("init-model is deterministic") {
  const std::vector<std::string> flags = {"init-model", "--layers", "3", "--blocks", "2", "--channels", "4", "--seed", "9",
                                          "--out"};
  auto a = flags, b = flags;
  a.push_back(tmp() / "a.txt");
  b.push_back(tmp() / "b.txt");
  REQUIRE(run(a).code == 0);
  REQUIRE(run(b).code == 0);
  CHECK(slurp(tmp() / "a.txt") == slurp(tmp() / "b.txt"));
}

TEST_CASE("usage errors exit with 2") {
  CHECK(run({"init-model", "--layers", "4", "--width", "1", "--out", tmp() / "x.txt"}).code == 2);
  CHECK_FALSE(fs::exists(tmp() / "x.txt"));
  CHECK(run({"init-model", "--layers", "4", "--activation", "relu", "--out", tmp() / "x.txt"}).code == 2);
  CHECK(run({"init-model", "--out", tmp() / "x.txt"}).code == 2);
  CHECK(run({}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"generate", "--model", tmp() / "missing.txt", "--steps", "3", "--out", tmp() / "o.txt"}).code == 2);
  CHECK(run({"verify", "--steps", "3"}).code == 2);
  CHECK(run({"bench", "--layers-from", "3", "--layers-to", "2", "--out", tmp() / "b.csv"}).code == 2);
}

TEST_CASE("warning for dilation base below filter width") {
  const Result r = run({"init-model", "--layers", "2", "--width", "3", "--base", "2", "--out", tmp() / "w3.txt"});
  CHECK(r.code == 0);
  CHECK(r.err.find("warning:") != std::string::npos);
}

TEST_CASE("generate: fast and naive write byte-identical files") {
  const auto model = tmp() / "g.txt";
  REQUIRE(run({"init-model", "--layers", "4", "--blocks", "2", "--width", "3", "--channels", "4", "--seed", "5", "--out",
               model})
              .code == 0);
  spit(tmp() / "primer.txt", "0.5\n-0.25\n\n0.125\n");
  const Result f = run({"generate", "--model", model, "--steps", "50", "--mode", "fast", "--primer",
                        tmp() / "primer.txt", "--out", tmp() / "fast.txt"});
  const Result n = run({"generate", "--model", model, "--steps", "50", "--mode", "naive", "--primer",
                        tmp() / "primer.txt", "--out", tmp() / "naive.txt"});
  CHECK(f.code == 0);
  CHECK(n.code == 0);
  CHECK(f.err.find("macs_per_step:") != std::string::npos);
  CHECK(f.err.find("steps_per_sec:") != std::string::npos);
  const std::string fast = slurp(tmp() / "fast.txt");
  CHECK(fast == slurp(tmp() / "naive.txt"));
  CHECK(std::count(fast.begin(), fast.end(), '\n') == 50);
  CHECK(cli::read_samples(tmp() / "fast.txt").size() == 50);
}

TEST_CASE("generate edge cases") {
  const auto model = tmp() / "e.txt";
  REQUIRE(run({"init-model", "--layers", "2", "--out", model}).code == 0);
  CHECK(run({"generate", "--model", model, "--steps", "0", "--out", tmp() / "empty.txt"}).code == 0);
  CHECK(fs::exists(tmp() / "empty.txt"));
  CHECK(slurp(tmp() / "empty.txt").empty());

  spit(tmp() / "bad_primer.txt", "0.5\nabc\n");
  CHECK(run({"generate", "--model", model, "--steps", "3", "--primer", tmp() / "bad_primer.txt", "--out",
             tmp() / "o.txt"})
            .code == 2);
  CHECK(run({"generate", "--model", model, "--steps", "3", "--mode", "medium", "--out", tmp() / "o.txt"}).code == 2);

  save_model(zero_model(fastwave::testing::make_config(2, 3, 2, 2, 4)), fs::path(tmp() / "zero.txt"));
  REQUIRE(run({"generate", "--model", tmp() / "zero.txt", "--steps", "10", "--primer", tmp() / "primer.txt", "--out",
               tmp() / "zeros.txt"})
              .code == 0);
  CHECK(cli::read_samples(tmp() / "zeros.txt") == std::vector<double>(10, 0.0));
}

TEST_CASE("verify passes on a seeded model and detects a perturbed one") {
  const auto model = tmp() / "v.txt";
  REQUIRE(run({"init-model", "--layers", "3", "--blocks", "2", "--channels", "4", "--seed", "3", "--out", model}).code ==
          0);
  const std::string before = slurp(model);

  const Result ok = run({"verify", "--model", model, "--steps", "32"});
  CHECK(ok.code == 0);
  CHECK(ok.out.find("max_abs_dev 0 ok") != std::string::npos);
  CHECK(ok.out.find("MISMATCH") == std::string::npos);
  CHECK(slurp(model) == before);

  spit(tmp() / "p.txt", "0.5\n");
  REQUIRE(run({"generate", "--model", model, "--steps", "32", "--primer", tmp() / "p.txt", "--out", tmp() / "ref.txt"})
              .code == 0);
  CHECK(run({"verify", "--model", model, "--steps", "32", "--expect", tmp() / "ref.txt"}).code == 0);

  // Nudge one weight and compare against the samples from the original.
  std::string doc = before;
  const auto pos = doc.find("tap 0\n") + 6;
  if (doc[pos] == '-')
    doc.erase(pos, 1);
  else
    doc.insert(pos, "-");
  spit(tmp() / "v2.txt", doc);
  const Result bad = run({"verify", "--model", tmp() / "v2.txt", "--steps", "32", "--expect", tmp() / "ref.txt"});
  CHECK(bad.code == 1);
  CHECK(bad.out.find("MISMATCH") != std::string::npos);
  CHECK(bad.err.find("free_run fast vs expected") != std::string::npos);
}

TEST_CASE("verify single step and random grid") {
  const auto model = tmp() / "s.txt";
  REQUIRE(run({"init-model", "--layers", "5", "--out", model}).code == 0);
  CHECK(run({"verify", "--model", model, "--steps", "1"}).code == 0);

  const Result grid = run({"verify", "--random-grid", "--steps", "16"});
  CHECK(grid.code == 0);
  CHECK(grid.out.find("MISMATCH") == std::string::npos);
  CHECK(run({"verify", "--random-grid", "--model", model}).code == 2);
  CHECK(run({"verify", "--model", model, "--tol", "-1"}).code == 2);
}

TEST_CASE("bench writes a CSV and a ratio summary") {
  const auto csv = tmp() / "bench.csv";
  const Result r = run({"bench", "--layers-from", "1", "--layers-to", "1", "--repeats", "2", "--steps", "2", "--warmup",
                        "0", "--out", csv});
  CHECK(r.code == 0);
  CHECK(r.out.find("L fast/naive\n1 ") != std::string::npos);
  std::ifstream in(csv);
  const auto records = parse_records(in);
  REQUIRE(records.size() == 2);
  CHECK(records[0].mode == Mode::fast);
  CHECK(records[1].mode == Mode::naive);
  CHECK(records[0].blocks == 2);
  CHECK(records[0].repeats == 2);
}
