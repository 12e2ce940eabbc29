#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "config.hpp"

namespace predcode::cli {

struct RunReport {
  std::string experiment;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir;
  double wall_time_s = 0.0;
  std::vector<std::pair<std::string, double>> metrics;  // insertion order
  std::vector<std::string> artifacts;                   // relative to out_dir

  double metric(std::string_view name) const;
};

/// Runs one experiment into config.out_dir (created if needed) and writes
/// manifest.json there. Every artifact is listed relative to out_dir and
/// exists on return.
RunReport run_experiment(const ExperimentConfig& config);

/// Trial i runs with seed + i into out_dir/trial_<i>, `threads` at a time
/// (0: hardware concurrency). Writes out_dir/trials.csv. Reports are in
/// trial order. The first failure is rethrown after all workers stop.
std::vector<RunReport> run_trials(const ExperimentConfig& config, std::size_t trials,
                                  std::size_t threads = 0);

}  // namespace predcode::cli
