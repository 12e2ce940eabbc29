#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"

int main(int argc, char** argv) {
  using namespace predcode::cli;
  CLI::App app{"predcode: predictive-coding algorithms, experiments and architecture checks"};
  app.require_subcommand(1);

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "Run an experiment from an INI config");
  run_cmd->add_option("config", run.config, "Config file")->required();
  run_cmd->add_option("--trials", run.trials, "Independent seeds seed..seed+N-1")->check(CLI::PositiveNumber);
  run_cmd->add_option("--threads", run.threads, "Worker threads for --trials (0: all cores)");

  std::string arch_action, arch_source;
  auto* arch_cmd = app.add_subcommand("arch", "Validate an architecture or count its parameters");
  arch_cmd->add_option("action", arch_action, "validate | params")->required();
  arch_cmd->add_option("source", arch_source, "Preset name or architecture file")->required();

  ExportOptions exp;
  std::string exp_dir;
  auto* export_cmd = app.add_subcommand("export", "Write one PGM per weight-file row");
  export_cmd->add_option("weights", exp.weights, "Weight file")->required();
  export_cmd->add_option("--shape", exp.shape, "Image shape HxW (default: square)");
  export_cmd->add_option("--out", exp_dir, "Output directory (default: next to the weights)");

  std::string experiment;
  auto* config_cmd = app.add_subcommand("config", "Print a default config (or list experiments)");
  config_cmd->add_option("experiment", experiment, "Experiment name");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  if (*run_cmd) return cmd_run(run, std::cout, std::cerr);
  if (*arch_cmd) return cmd_arch(arch_action, arch_source, std::cout, std::cerr);
  if (*export_cmd) {
    if (!exp_dir.empty()) exp.out_dir = exp_dir;
    return cmd_export(exp, std::cout, std::cerr);
  }
  return cmd_config(experiment, std::cout, std::cerr);
}
