#include "config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace predcode::cli {

ConfigError::ConfigError(std::string key, const std::string& what)
    : std::runtime_error(what), key_(std::move(key)) {}

namespace {

KeySpec hp(std::string key, ValueType type, std::string def, std::string help) {
  return {"hyperparams", std::move(key), type, std::move(def), std::move(help)};
}

KeySpec ds(std::string key, ValueType type, std::string def, std::string help) {
  return {"dataset", std::move(key), type, std::move(def), std::move(help)};
}

constexpr auto kNum = ValueType::number;
constexpr auto kInt = ValueType::integer;
constexpr auto kBool = ValueType::boolean;
constexpr auto kText = ValueType::text;

}  // namespace

const std::vector<ExperimentSchema>& experiment_schemas() {
  static const std::vector<ExperimentSchema> schemas = {
      {"rb_endstopping",
       "train the 3-level patch hierarchy on bar images, then compare centre-module "
       "Level-2 error for a receptive-field-wide and a full-width bar, with and "
       "without Level-3 feedback",
       {hp("k1", kNum, "0.05", "representation rate"),
        hp("k2", kNum, "0.003", "weight learning rate"),
        hp("l2_units", kInt, "32", "units per Level-2 patch module"),
        hp("l3_units", kInt, "32", "Level-3 units"),
        hp("init_range", kNum, "0.1", "initial weights uniform in +-init_range"),
        hp("epochs", kInt, "10", "passes over the training images"),
        hp("steps_per_input", kInt, "20", "inference steps before each weight update"),
        hp("test_steps", kInt, "100", "inference steps for the test stimuli"),
        hp("max_angle", kNum, "0.5235987755982988", "training bar orientation range (radians)"),
        hp("bar_thickness", kNum, "1", "Gaussian bar profile sigma (pixels)"),
        hp("noise_sd", kNum, "0.05", "pixel noise on training images"),
        ds("train_images", kInt, "300", "number of training images"),
        ds("patch_size", kInt, "16", "square patch side"),
        ds("overlap", kInt, "11", "horizontal patch overlap"),
        ds("patches", kInt, "3", "patch modules at Level 2")}},
      {"dim_bars",
       "learn the bars problem with divisive input modulation",
       {hp("units", kInt, "16", "representation units"),
        hp("epochs", kInt, "200", "passes over the dataset"),
        hp("r_steps", kInt, "25", "inference iterations per image"),
        hp("beta", kNum, "0.05", "weight learning rate"),
        hp("eps1", kNum, "0.01", "activation floor"),
        hp("eps2", kNum, "0.01", "prediction floor"),
        hp("init_max", kNum, "0.1", "initial weights uniform in [0, init_max)"),
        hp("normalize_rows", kBool, "false", "L1-normalize weight rows after each epoch"),
        hp("recovery_threshold", kNum, "0.9", "cosine needed to count a bar as recovered"),
        ds("side", kInt, "8", "image side"),
        ds("p_bar", kNum, "0.125", "probability of each bar"),
        ds("images", kInt, "1000", "number of generated images"),
        ds("path", kText, "", "optional P5 PGM of side-wide images stacked vertically")}},
      {"fe_scalar",
       "scalar free-energy network learning u = theta_true * v from a stream",
       {hp("dt", kNum, "0.01", "Euler step"),
        hp("inner_steps", kInt, "500", "node-dynamics steps per observation"),
        hp("rate", kNum, "0.001", "learning rate"),
        hp("v_p", kNum, "5", "initial prior mean"),
        hp("sigma_p2", kNum, "1", "initial prior variance"),
        hp("sigma_u2", kNum, "1", "initial sensory variance"),
        hp("theta", kNum, "1", "initial generative weight"),
        hp("learn_v_p", kBool, "true", ""),
        hp("learn_sigma_p2", kBool, "true", ""),
        hp("learn_sigma_u2", kBool, "true", ""),
        hp("learn_theta", kBool, "true", ""),
        ds("observations", kInt, "2000", "stream length"),
        ds("theta_true", kNum, "2", "generating weight"),
        ds("v_mean", kNum, "5", "cause mean"),
        ds("v_sd", kNum, "1", "cause standard deviation"),
        ds("u_noise_sd", kNum, "0", "sensory noise standard deviation")}},
      {"fe_multilayer",
       "settle a multi-level free-energy network on one sample of its generative model",
       {hp("dt", kNum, "0.01", "Euler step"),
        hp("steps", kInt, "20000", "Euler steps"),
        hp("log_every", kInt, "100", "trace interval in steps"),
        hp("input_dim", kInt, "4", "observation width"),
        hp("hidden_dim", kInt, "3", "width of every cause level"),
        hp("levels", kInt, "2", "cause levels above the observation"),
        hp("activation", kText, "identity", "identity or tanh"),
        hp("theta_scale", kNum, "0.5", "weights uniform in +-theta_scale"),
        hp("sigma", kNum, "1", "diagonal variance at every level"),
        hp("prior", kNum, "0", "top-level prior value (all entries)"),
        ds("obs_noise", kNum, "0.1", "generative noise variance per level"),
        ds("cause_sd", kNum, "1", "standard deviation of the sampled top cause")}},
      {"pcn_classify",
       "train predictive-coding classifiers and compare against plain feedforward",
       {hp("mode", kText, "global", "plain, global or local"),
        hp("baseline", kBool, "true", "also train plain mode from the same init"),
        hp("T", kInt, "3", "recurrent cycles"),
        hp("max_T", kInt, "6", "upper bound on T"),
        hp("k1", kNum, "0.1", "feedforward update rate"),
        hp("beta", kNum, "0.5", "feedback blend"),
        hp("lr", kNum, "0.05", "SGD learning rate"),
        hp("epochs", kInt, "20", "training epochs"),
        hp("batch", kInt, "32", "mini-batch size"),
        hp("hidden", kInt, "32", "hidden width"),
        hp("layers", kInt, "2", "hidden layers"),
        hp("skip", kBool, "false", "identity skip connections (needs equal widths)"),
        ds("source", kText, "raster_digits", "raster_digits, two_moons or two_gaussians"),
        ds("train", kInt, "500", "training samples"),
        ds("test", kInt, "500", "test samples"),
        ds("flip_prob", kNum, "0.1", "raster pixel flip probability"),
        ds("noise_sd", kNum, "0.3", "raster additive noise"),
        ds("moons_noise", kNum, "0.2", "two_moons jitter"),
        ds("gauss_dim", kInt, "8", "two_gaussians dimension"),
        ds("separation", kNum, "2", "two_gaussians mean separation"),
        ds("gauss_sd", kNum, "1", "two_gaussians standard deviation")}},
  };
  return schemas;
}

const ExperimentSchema* find_schema(std::string_view experiment) {
  for (const auto& s : experiment_schemas())
    if (s.name == experiment) return &s;
  return nullptr;
}

namespace {

std::string qualified(std::string_view section, std::string_view key) {
  return std::string(section) + "." + std::string(key);
}

bool parse_bool(const std::string& v, bool& out) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return out = true, true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return out = false, true;
  return false;
}

void check_type(const std::string& name, ValueType type, const std::string& v) {
  switch (type) {
    case ValueType::number: {
      double d = 0.0;
      const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), d);
      if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(d)) {
        throw ConfigError(name, "'" + name + "' expects a number, got '" + v + "'");
      }
      break;
    }
    case ValueType::integer: {
      long long i = 0;
      const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), i);
      if (ec != std::errc() || p != v.data() + v.size() || i < 0) {
        throw ConfigError(name, "'" + name + "' expects a non-negative integer, got '" + v + "'");
      }
      break;
    }
    case ValueType::boolean: {
      bool b = false;
      if (!parse_bool(v, b)) throw ConfigError(name, "'" + name + "' expects true/false, got '" + v + "'");
      break;
    }
    case ValueType::text:
      break;
  }
}

const std::map<std::string, std::string>& section_of(const ExperimentConfig& c,
                                                     std::string_view section) {
  if (section == "hyperparams") return c.hyperparams;
  if (section == "dataset") return c.dataset;
  throw std::logic_error("no config section '" + std::string(section) + "'");
}

const std::string& lookup(const ExperimentConfig& c, std::string_view section, std::string_view key) {
  const auto& m = section_of(c, section);
  const auto it = m.find(std::string(key));
  if (it == m.end()) throw std::logic_error("undeclared config key " + qualified(section, key));
  return it->second;
}

}  // namespace

double ExperimentConfig::number(std::string_view section, std::string_view key) const {
  const std::string& v = lookup(*this, section, key);
  double d = 0.0;
  std::from_chars(v.data(), v.data() + v.size(), d);
  return d;
}

long long ExperimentConfig::integer(std::string_view section, std::string_view key) const {
  const std::string& v = lookup(*this, section, key);
  long long i = 0;
  std::from_chars(v.data(), v.data() + v.size(), i);
  return i;
}

std::size_t ExperimentConfig::count(std::string_view section, std::string_view key) const {
  const long long i = integer(section, key);
  if (i < 0) {
    throw ConfigError(qualified(section, key),
                      "'" + qualified(section, key) + "' must be >= 0, got " + std::to_string(i));
  }
  return static_cast<std::size_t>(i);
}

bool ExperimentConfig::flag(std::string_view section, std::string_view key) const {
  bool b = false;
  parse_bool(lookup(*this, section, key), b);
  return b;
}

const std::string& ExperimentConfig::text(std::string_view section, std::string_view key) const {
  return lookup(*this, section, key);
}

ExperimentConfig parse_config(std::string_view text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    std::istringstream is{std::string(text)};
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("", "config line " + std::to_string(e.line()) + ": " + e.message());
  }

  for (const auto& [name, node] : tree) {
    if (name == "run" || name == "hyperparams" || name == "dataset") continue;
    if (node.empty()) throw ConfigError(name, "key '" + name + "' must be inside a [section]");
    throw ConfigError(name, "unknown section [" + name + "] (expected run, hyperparams, dataset)");
  }

  ExperimentConfig c;
  const pt::ptree empty;
  const auto& run = tree.get_child("run", empty);
  for (const auto& [key, node] : run) {
    if (key != "experiment" && key != "seed" && key != "out_dir") {
      throw ConfigError(qualified("run", key), "unknown key '" + key + "' in [run]");
    }
  }
  auto required = [&](const char* key) {
    const auto v = run.get_optional<std::string>(key);
    if (!v || v->empty()) throw ConfigError(qualified("run", key), "missing required key 'run." + std::string(key) + "'");
    return *v;
  };
  c.experiment = required("experiment");
  const std::string seed = required("seed");
  {
    const auto [p, ec] = std::from_chars(seed.data(), seed.data() + seed.size(), c.seed);
    if (ec != std::errc() || p != seed.data() + seed.size()) {
      throw ConfigError("run.seed", "'run.seed' expects an unsigned 64-bit integer, got '" + seed + "'");
    }
  }
  c.out_dir = required("out_dir");

  const ExperimentSchema* schema = find_schema(c.experiment);
  if (!schema) {
    std::string known;
    for (const auto& s : experiment_schemas()) known += (known.empty() ? "" : ", ") + s.name;
    throw ConfigError("run.experiment", "unknown experiment '" + c.experiment + "' (known: " + known + ")");
  }

  for (const char* section : {"hyperparams", "dataset"}) {
    auto& dst = std::string_view(section) == "hyperparams" ? c.hyperparams : c.dataset;
    std::set<std::string> declared;
    for (const auto& k : schema->keys) {
      if (k.section != section) continue;
      declared.insert(k.key);
      dst[k.key] = k.default_value;
    }
    for (const auto& [key, node] : tree.get_child(section, empty)) {
      const std::string name = qualified(section, key);
      if (!declared.count(key)) {
        throw ConfigError(name, "unknown key '" + key + "' in [" + section + "] for experiment " +
                                    c.experiment);
      }
      dst[key] = node.get_value<std::string>();
    }
    for (const auto& k : schema->keys) {
      if (k.section == section) check_type(qualified(section, k.key), k.type, dst[k.key]);
    }
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", "cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string to_ini(const ExperimentConfig& c) {
  std::ostringstream os;
  os << "[run]\nexperiment = " << c.experiment << "\nseed = " << c.seed
     << "\nout_dir = " << c.out_dir.generic_string() << "\n\n[hyperparams]\n";
  for (const auto& [k, v] : c.hyperparams) os << k << " = " << v << '\n';
  os << "\n[dataset]\n";
  for (const auto& [k, v] : c.dataset) os << k << " = " << v << '\n';
  return os.str();
}

ExperimentConfig default_config(std::string_view experiment, std::uint64_t seed,
                                std::filesystem::path out_dir) {
  std::ostringstream os;
  os << "[run]\nexperiment = " << experiment << "\nseed = " << seed
     << "\nout_dir = " << out_dir.generic_string() << '\n';
  return parse_config(os.str());
}

}  // namespace predcode::cli
