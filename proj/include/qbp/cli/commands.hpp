#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace qbp::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitDimension = 3,
  kExitLemma = 4,
};

struct RunOptions {
  std::filesystem::path config;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
  unsigned jobs = 0;  // 0: hardware concurrency
};

const std::vector<std::string>& command_names();

/// Runs one command and maps errors onto the exit-code contract. Progress and
/// error messages go to `log`.
int run_command(const std::string& command, const RunOptions& options, std::ostream& log);

/// Entry point for the `qbp` executable.
int cli_main(int argc, char** argv);

/// Runs task(i) for i in [0, n) on up to `jobs` threads. Exceptions are
/// rethrown in index order after all tasks finish.
void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& task);

/// "%.17g", the CSV float format.
std::string format_double(double x);

}  // namespace qbp::cli
