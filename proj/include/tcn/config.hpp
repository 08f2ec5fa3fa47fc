#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace tcn {

/// Bad config file or value; `key()` names the offending entry (may be empty).
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(const std::string& key, const std::string& what)
      : std::invalid_argument(key.empty()                 ? what
                                : key.rfind("--", 0) == 0 ? "option '" + key + "': " + what
                                                          : "config key '" + key + "': " + what),
        key_(key) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

// Flat namespaced key=value settings. Every known key has a default; files and
// overrides may only set known keys. `#` starts a comment.
class ExperimentConfig {
 public:
  ExperimentConfig();

  static ExperimentConfig parse(const std::string& text, const std::string& source = "<config>");
  static ExperimentConfig load(const std::string& path);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const { return values_.count(key) != 0; }

  const std::string& get(const std::string& key) const;
  int get_int(const std::string& key) const;
  long get_long(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  double get_double(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::vector<double> get_doubles(const std::string& key) const;
  std::vector<std::string> get_list(const std::string& key, char separator = ';') const;

  // Sorted "key=value" lines of the full resolved config.
  std::string canonical() const;
  // 16 hex digits of FNV-1a 64 over canonical().
  std::string hash() const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

std::uint64_t fnv1a64(const std::string& bytes);

// Known keys with their defaults.
const std::map<std::string, std::string>& default_config_values();

}  // namespace tcn
