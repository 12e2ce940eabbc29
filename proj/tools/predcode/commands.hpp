#pragma once

// Subcommands behind the `predcode` executable. Each returns the process exit
// code: 0 success, 1 runtime failure, 2 config/parse error, 3 protocol
// violation. Normal output goes to `out`, diagnostics to `err`.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

namespace predcode::cli {

enum ExitCode : int { kOk = 0, kRuntimeError = 1, kConfigError = 2, kProtocolViolation = 3 };

struct RunOptions {
  std::filesystem::path config;
  std::size_t trials = 1;
  std::size_t threads = 0;  // 0: hardware concurrency
};

int cmd_run(const RunOptions& options, std::ostream& out, std::ostream& err);

/// `action` is "validate" or "params"; `source` is a preset name or a file.
int cmd_arch(const std::string& action, const std::string& source, std::ostream& out,
             std::ostream& err);

struct ExportOptions {
  std::filesystem::path weights;
  std::string shape;                      // "HxW"
  std::optional<std::filesystem::path> out_dir;  // default: next to the weights file
};

/// Writes <stem>_<row>.pgm for every weight row.
int cmd_export(const ExportOptions& options, std::ostream& out, std::ostream& err);

/// Prints the default config for `experiment` (or lists experiments).
int cmd_config(const std::string& experiment, std::ostream& out, std::ostream& err);

}  // namespace predcode::cli
