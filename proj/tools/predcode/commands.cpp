#include "commands.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>

#include "experiments.hpp"
#include "predcode/archproto.hpp"
#include "predcode/core.hpp"
#include "predcode/io.hpp"

namespace predcode::cli {

namespace {

namespace fs = std::filesystem;

bool parse_size(std::string_view s, std::size_t& v) {
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  return ec == std::errc{} && p == end && !s.empty();
}

std::optional<std::pair<std::size_t, std::size_t>> parse_shape(std::string_view s) {
  const auto x = s.find_first_of("xX");
  std::size_t h = 0, w = 0;
  if (x == std::string_view::npos || !parse_size(s.substr(0, x), h) || !parse_size(s.substr(x + 1), w) ||
      h == 0 || w == 0) {
    return std::nullopt;
  }
  return std::pair{h, w};
}

}  // namespace

int cmd_run(const RunOptions& options, std::ostream& out, std::ostream& err) {
  ExperimentConfig config;
  try {
    config = load_config(options.config);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  }
  try {
    if (options.trials <= 1) {
      const RunReport r = run_experiment(config);
      out << r.experiment << " seed=" << r.seed << " out_dir=" << r.out_dir.string() << '\n';
      for (const auto& [k, v] : r.metrics) out << "  " << k << " = " << format_number(v) << '\n';
      out << "  artifacts: " << r.artifacts.size() << ", wall time " << std::fixed
          << std::setprecision(2) << r.wall_time_s << " s\n";
      out.unsetf(std::ios::floatfield);
    } else {
      const auto reports = run_trials(config, options.trials, options.threads);
      out << config.experiment << ": " << reports.size() << " trials, seeds " << config.seed << ".."
          << config.seed + reports.size() - 1 << ", summary in "
          << (config.out_dir / "trials.csv").string() << '\n';
      for (std::size_t m = 0; m < reports.front().metrics.size(); ++m) {
        double mean = 0.0;
        for (const auto& r : reports) mean += r.metrics[m].second;
        out << "  mean " << reports.front().metrics[m].first << " = "
            << format_number(mean / static_cast<double>(reports.size())) << '\n';
      }
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const DimensionError& e) {
    err << "dimension error: " << e.what() << '\n';
    return kConfigError;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kRuntimeError;
  } catch (const FormatError& e) {
    err << "format error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kOk;
}

int cmd_arch(const std::string& action, const std::string& source, std::ostream& out,
             std::ostream& err) {
  if (action != "validate" && action != "params") {
    err << "unknown arch action '" << action << "' (expected validate or params)\n";
    return kConfigError;
  }
  arch::Architecture a;
  try {
    if (auto p = arch::preset(source)) {
      a = std::move(*p);
    } else if (fs::is_regular_file(source)) {
      std::ifstream in(source);
      a = arch::parse_architecture(in, fs::path(source).stem().string());
    } else {
      err << "'" << source << "' is neither a preset nor a readable file; presets:";
      for (const auto& n : arch::preset_names()) err << ' ' << n;
      err << '\n';
      return kConfigError;
    }
    if (action == "params") {
      out << format_param_table(a);
      return kOk;
    }
    arch::link_table(a);
    const auto report = arch::validate_rb_protocol(a);
    out << a.name << ": " << arch::format_report(report);
    return report.pass ? kOk : kProtocolViolation;
  } catch (const arch::ArchParseError& e) {
    err << source << ": " << e.what() << '\n';
    return kConfigError;
  } catch (const arch::ArchError& e) {
    err << "invalid architecture: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
}

int cmd_export(const ExportOptions& options, std::ostream& out, std::ostream& err) {
  Matrix w;
  try {
    w = read_weights(options.weights);
  } catch (const FormatError& e) {
    err << "format error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "cannot read " << options.weights.string() << ": " << e.what() << '\n';
    return kConfigError;
  }
  std::size_t h = 0, wd = 0;
  if (!options.shape.empty()) {
    const auto s = parse_shape(options.shape);
    if (!s) {
      err << "--shape must look like HxW, got '" << options.shape << "'\n";
      return kConfigError;
    }
    std::tie(h, wd) = *s;
  } else {
    const auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(w.cols()))));
    if (side * side != w.cols()) {
      err << "rows have " << w.cols() << " values, not a square; pass --shape HxW\n";
      return kConfigError;
    }
    h = wd = side;
  }
  if (h * wd != w.cols()) {
    err << "shape " << h << "x" << wd << " does not hold a row of " << w.cols() << " values\n";
    return kConfigError;
  }
  const fs::path dir = options.out_dir ? *options.out_dir : options.weights.parent_path();
  try {
    if (!dir.empty()) fs::create_directories(dir);
    const std::string stem = options.weights.stem().string();
    const std::size_t digits = std::to_string(w.rows() == 0 ? 0 : w.rows() - 1).size();
    for (std::size_t r = 0; r < w.rows(); ++r) {
      std::string idx = std::to_string(r);
      idx.insert(0, digits - idx.size(), '0');
      const fs::path p = dir / (stem + "_" + idx + ".pgm");
      write_pgm(p, w.row(r), h, wd);
      out << p.string() << '\n';
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kOk;
}

int cmd_config(const std::string& experiment, std::ostream& out, std::ostream& err) {
  if (experiment.empty()) {
    for (const auto& s : experiment_schemas()) out << s.name << "  " << s.summary << '\n';
    return kOk;
  }
  if (!find_schema(experiment)) {
    err << "unknown experiment '" << experiment << "'\n";
    return kConfigError;
  }
  const ExperimentSchema& schema = *find_schema(experiment);
  out << "; " << schema.summary << "\n[run]\nexperiment = " << experiment << "\nseed = 1\nout_dir = runs/"
      << experiment << '\n';
  for (const char* section : {"hyperparams", "dataset"}) {
    out << "\n[" << section << "]\n";
    for (const auto& k : schema.keys) {
      if (k.section != section) continue;
      if (!k.help.empty()) out << "; " << k.help << '\n';
      out << k.key << " = " << k.default_value << '\n';
    }
  }
  return kOk;
}

}  // namespace predcode::cli
