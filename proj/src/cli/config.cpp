#include "cli/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>

#include <boost/property_tree/ini_parser.hpp>

#include "npde/io.hpp"

namespace npde::cli {

namespace pt = boost::property_tree;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Keys are `section.key`; property_tree uses '.' as its path separator already.
pt::ptree::path_type path_of(const std::string& key) { return pt::ptree::path_type(key, '.'); }

}  // namespace

ConfigError::ConfigError(const std::string& key, const std::string& message)
    : std::runtime_error("config key '" + key + "': " + message), key_(key) {}

Config Config::load(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw ConfigError("--config", "file not found: " + path.string());
  }
  const auto base = std::filesystem::absolute(path).parent_path();
  if (path.extension() == ".json") {
    std::ifstream in(path);
    nlohmann::json manifest;
    try {
      in >> manifest;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("--config", std::string("malformed manifest: ") + e.what());
    }
    return from_manifest(manifest, base);
  }
  Config cfg;
  cfg.base_dir_ = base;
  try {
    pt::read_ini(path.string(), cfg.tree_);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("--config", e.what());
  }
  return cfg;
}

Config Config::from_manifest(const nlohmann::json& manifest, std::filesystem::path base_dir) {
  if (!manifest.contains("config") || !manifest["config"].is_object()) {
    throw ConfigError("--config", "manifest has no 'config' object");
  }
  Config cfg;
  cfg.base_dir_ = std::move(base_dir);
  for (const auto& [key, value] : manifest["config"].items()) {
    if (!value.is_string()) throw ConfigError(key, "manifest values must be strings");
    cfg.set(key, value.get<std::string>());
  }
  return cfg;
}

void Config::apply_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError(assignment, "override must look like section.key=value");
  }
  const auto key = trim(assignment.substr(0, eq));
  if (key.find('.') == std::string::npos) {
    throw ConfigError(key, "override key needs a section, e.g. dynamics.omega");
  }
  set(key, trim(assignment.substr(eq + 1)));
}

void Config::set(const std::string& key, const std::string& value) {
  tree_.put(path_of(key), value);
}

bool Config::has(const std::string& key) const { return raw(key).has_value(); }

std::optional<std::string> Config::raw(const std::string& key) const {
  if (auto v = tree_.get_optional<std::string>(path_of(key))) {
    auto t = trim(*v);
    if (!t.empty()) return t;
  }
  return std::nullopt;
}

void Config::record(const std::string& key, const std::string& value) const {
  resolved_[key] = value;
}

std::string Config::get_string(const std::string& key, const std::optional<std::string>& fallback) const {
  auto v = raw(key);
  if (!v) {
    if (!fallback) throw ConfigError(key, "required value is missing");
    v = fallback;
  }
  record(key, *v);
  return *v;
}

double Config::get_double(const std::string& key, const std::optional<double>& fallback) const {
  auto v = raw(key);
  if (!v) {
    if (!fallback) throw ConfigError(key, "required value is missing");
    record(key, io::format_double(*fallback));
    return *fallback;
  }
  double out = 0.0;
  const auto* first = v->data();
  const auto* last = v->data() + v->size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last || !std::isfinite(out)) {
    throw ConfigError(key, "expected a finite number, got '" + *v + "'");
  }
  record(key, *v);
  return out;
}

std::size_t Config::get_count(const std::string& key, const std::optional<std::size_t>& fallback) const {
  auto v = raw(key);
  if (!v) {
    if (!fallback) throw ConfigError(key, "required value is missing");
    record(key, std::to_string(*fallback));
    return *fallback;
  }
  if (v->front() == '-') throw ConfigError(key, "expected a non-negative integer, got '" + *v + "'");
  std::size_t out = 0;
  const auto* last = v->data() + v->size();
  auto [ptr, ec] = std::from_chars(v->data(), last, out);
  if (ec != std::errc() || ptr != last) {
    throw ConfigError(key, "expected a non-negative integer, got '" + *v + "'");
  }
  record(key, *v);
  return out;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  auto v = raw(key);
  if (!v) {
    record(key, fallback ? "true" : "false");
    return fallback;
  }
  std::string s = *v;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  bool out = false;
  if (s == "true" || s == "1" || s == "yes" || s == "on") {
    out = true;
  } else if (s == "false" || s == "0" || s == "no" || s == "off") {
    out = false;
  } else {
    throw ConfigError(key, "expected a boolean, got '" + *v + "'");
  }
  record(key, out ? "true" : "false");
  return out;
}

std::filesystem::path Config::get_path(const std::string& key) const {
  const auto v = raw(key);
  if (!v) throw ConfigError(key, "required path is missing");
  std::filesystem::path p(*v);
  if (p.is_relative()) p = base_dir_ / p;
  p = p.lexically_normal();
  record(key, p.string());
  return p;
}

double Config::get_positive(const std::string& key, const std::optional<double>& fallback) const {
  const double v = get_double(key, fallback);
  if (!(v > 0.0)) throw ConfigError(key, "must be positive");
  return v;
}

double Config::get_non_negative(const std::string& key, const std::optional<double>& fallback) const {
  const double v = get_double(key, fallback);
  if (!(v >= 0.0)) throw ConfigError(key, "must be non-negative");
  return v;
}

}  // namespace npde::cli
