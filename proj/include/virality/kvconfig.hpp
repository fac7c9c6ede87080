#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace virality {

// Run/train configuration files: `key = value` lines, '#' comments, a
// mandatory `version` key. Kept as an ordered map so serialization is stable.
class KvConfig {
 public:
  KvConfig() = default;

  static KvConfig parse(std::istream& in, const std::string& origin = "<stream>") {
    KvConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      std::string_view v = trim(line);
      if (v.empty() || v.front() == '#') continue;
      const auto eq = v.find('=');
      if (eq == std::string_view::npos) {
        throw std::runtime_error(origin + ":" + std::to_string(lineno) +
                                 ": expected key = value");
      }
      const std::string key{trim(v.substr(0, eq))};
      const std::string val{trim(v.substr(eq + 1))};
      if (key.empty()) {
        throw std::runtime_error(origin + ":" + std::to_string(lineno) + ": empty key");
      }
      cfg.values_[key] = val;
    }
    if (!cfg.has("version")) {
      throw std::runtime_error(origin + ": missing required key 'version'");
    }
    return cfg;
  }

  static KvConfig parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    return parse(in, path);
  }

  static KvConfig parse_string(const std::string& text) {
    std::istringstream in(text);
    return parse(in);
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string get_string(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  std::string require_string(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw std::runtime_error("config missing key: " + key);
    return it->second;
  }

  std::int64_t get_int(const std::string& key, std::int64_t fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::size_t pos = 0;
    const std::int64_t v = std::stoll(it->second, &pos);
    if (pos != it->second.size()) {
      throw std::runtime_error("config key '" + key + "' is not an integer: " + it->second);
    }
    return v;
  }

  double get_double(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::size_t pos = 0;
    const double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) {
      throw std::runtime_error("config key '" + key + "' is not a number: " + it->second);
    }
    return v;
  }

  bool get_bool(const std::string& key, bool fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (it->second == "true" || it->second == "1") return true;
    if (it->second == "false" || it->second == "0") return false;
    throw std::runtime_error("config key '" + key + "' is not a boolean: " + it->second);
  }

  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  const std::map<std::string, std::string>& items() const { return values_; }

  std::string serialize() const {
    std::ostringstream out;
    for (const auto& [k, v] : values_) out << k << " = " << v << "\n";
    return out.str();
  }

 private:
  static std::string_view trim(std::string_view v) {
    while (!v.empty() && (v.front() == ' ' || v.front() == '\t' || v.front() == '\r')) {
      v.remove_prefix(1);
    }
    while (!v.empty() && (v.back() == ' ' || v.back() == '\t' || v.back() == '\r')) {
      v.remove_suffix(1);
    }
    return v;
  }

  std::map<std::string, std::string> values_;
};

}  // namespace virality
