#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>

#include <boost/property_tree/ptree.hpp>
#include <nlohmann/json.hpp>

namespace npde::cli {

/// Invalid or missing configuration value; what() names the key.
class ConfigError : public std::runtime_error {
public:
  ConfigError(const std::string& key, const std::string& message);
  const std::string& key() const { return key_; }

private:
  std::string key_;
};

/// Sectioned key-value configuration (INI file, or the `config` object of a
/// run manifest) plus `section.key=value` overrides. Every value read is
/// recorded, defaults included, so the run can be replayed from the manifest.
class Config {
public:
  Config() = default;

  /// `.json` files are read as manifests; anything else as INI.
  static Config load(const std::filesystem::path& path);
  static Config from_manifest(const nlohmann::json& manifest, std::filesystem::path base_dir);

  /// Applies an override of the form `section.key=value`.
  void apply_override(const std::string& assignment);
  void set(const std::string& key, const std::string& value);

  bool has(const std::string& key) const;

  std::string get_string(const std::string& key, const std::optional<std::string>& fallback = std::nullopt) const;
  double get_double(const std::string& key, const std::optional<double>& fallback = std::nullopt) const;
  std::size_t get_count(const std::string& key, const std::optional<std::size_t>& fallback = std::nullopt) const;
  bool get_bool(const std::string& key, bool fallback) const;
  /// Relative paths resolve against the directory of the loaded config file.
  std::filesystem::path get_path(const std::string& key) const;

  double get_positive(const std::string& key, const std::optional<double>& fallback = std::nullopt) const;
  double get_non_negative(const std::string& key, const std::optional<double>& fallback = std::nullopt) const;

  /// Everything read so far, as strings keyed by `section.key`.
  const std::map<std::string, std::string>& resolved() const { return resolved_; }

private:
  std::optional<std::string> raw(const std::string& key) const;
  void record(const std::string& key, const std::string& value) const;

  boost::property_tree::ptree tree_;
  std::filesystem::path base_dir_ = std::filesystem::current_path();
  mutable std::map<std::string, std::string> resolved_;
};

}  // namespace npde::cli
