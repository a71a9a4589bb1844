#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fg {

enum ExitCode : int {
  kExitOk = 0,
  kExitVerificationFailed = 1,
  kExitConfigError = 2,
  kExitNumericFailure = 3,
};

struct CommandOptions {
  std::filesystem::path config;
  std::filesystem::path out;
  /// Overrides the command's primary tolerance.
  std::optional<double> tol;
  /// Number of uniform output points; adaptive nodes for `simulate` when unset.
  std::optional<std::size_t> dense;
  bool continue_through_poles = false;
  /// "name=value" parameter overrides.
  std::vector<std::string> params;
  /// `examples`: run only this one.
  std::optional<std::string> example;
  /// `examples`: worker cap; FLOQUET_GAUGE_THREADS, then the core count, when unset.
  std::optional<unsigned> threads;
};

struct CommandResult {
  int exit_code = kExitOk;
  /// One-line summary on success, the error otherwise.
  std::string message;
  /// Files written, relative to the output directory, in write order.
  std::vector<std::string> files;
};

/// Runs floquet, gauge, simulate, riccati or examples. Never throws; failures
/// map to exit codes: 1 verification failed, 2 bad config, aperiodic input or
/// unknown example, 3 numerical failure.
CommandResult run_command(std::string_view command, const CommandOptions& opts);

/// Doubles as written to CSV: 17 significant digits.
std::string format_csv_number(double v);

}  // namespace fg
