#pragma once

// Experiment configuration: an INI file with [run], [hyperparams] and
// [dataset] sections. Every experiment declares its keys with a type and a
// default; anything else is rejected by name.

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace predcode::cli {

/// Schema or syntax problem in a config; `key()` names the offender
/// ("section.key"), empty when the problem is not tied to one key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& what);
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

enum class ValueType { number, integer, boolean, text };

struct KeySpec {
  std::string section;  // "hyperparams" or "dataset"
  std::string key;
  ValueType type = ValueType::number;
  std::string default_value;
  std::string help;
};

struct ExperimentSchema {
  std::string name;
  std::string summary;
  std::vector<KeySpec> keys;
};

const std::vector<ExperimentSchema>& experiment_schemas();
const ExperimentSchema* find_schema(std::string_view experiment);

struct ExperimentConfig {
  std::string experiment;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir;
  /// Every declared key, defaults filled in; values already type-checked.
  std::map<std::string, std::string> hyperparams;
  std::map<std::string, std::string> dataset;

  double number(std::string_view section, std::string_view key) const;
  long long integer(std::string_view section, std::string_view key) const;
  std::size_t count(std::string_view section, std::string_view key) const;  // integer >= 0
  bool flag(std::string_view section, std::string_view key) const;
  const std::string& text(std::string_view section, std::string_view key) const;

  double hp(std::string_view key) const { return number("hyperparams", key); }
  std::size_t hp_count(std::string_view key) const { return count("hyperparams", key); }
};

/// Throws ConfigError on any syntax, schema or type problem.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Renders a config back to INI (all keys, defaults included).
std::string to_ini(const ExperimentConfig& c);

/// A config for `experiment` with every default filled in.
ExperimentConfig default_config(std::string_view experiment, std::uint64_t seed,
                                std::filesystem::path out_dir);

}  // namespace predcode::cli
