#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace fastwave::cli {

enum ExitCode : int {
  kSuccess = 0,
  kVerificationFailed = 1,
  kUsageError = 2,
};

// args[0] is the program name, as in argv.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Sample files hold one decimal value per line.
std::vector<double> read_samples(const std::filesystem::path& path);
void write_samples(const std::vector<double>& samples, const std::filesystem::path& path);

}  // namespace fastwave::cli
