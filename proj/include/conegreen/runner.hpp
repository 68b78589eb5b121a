// Subcommand dispatch for the command-line front end.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "conegreen/config.hpp"

namespace conegreen {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitFail = 2;

struct RunOptions {
  bool deterministic = false;
  /// CSV destination; empty prints the CSV to `out`.
  std::string out_path;
};

const std::vector<std::string>& command_names();

/// Problems that make `command` impossible to run with this config (all of them).
std::vector<std::string> command_errors(const std::string& command, const ExperimentConfig& config);

/// Runs one subcommand. CSV goes to the output path (atomically) or `out`; the
/// summary line goes to `out`, diagnostics to `err`. Returns 0, 2 on a failed
/// verification, 1 on an operational error.
int run_command(const std::string& command, const ExperimentConfig& config, const RunOptions& options,
                std::ostream& out, std::ostream& err);

/// Writes via a temporary file in the same directory and a rename.
void write_atomic(const std::string& path, const std::string& content);

}  // namespace conegreen
