#pragma once
// Run metadata (version, config hash, seed), key-value config files and
// small parsing helpers shared by the command-line tool and the self-check.

#include <cstdint>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "rotflow/rational.hpp"

#ifndef ROTFLOW_VERSION
#define ROTFLOW_VERSION "0.0.0"
#endif

namespace rotflow {

inline std::string version() { return ROTFLOW_VERSION; }

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << v;
  return os.str();
}

/// Canonical configuration: sorted key=value lines.  Its hash identifies a run.
class RunConfig {
 public:
  RunConfig() = default;
  RunConfig(std::string command, std::map<std::string, std::string> values) : command_(std::move(command)), values_(std::move(values)) {}

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  [[nodiscard]] bool has(const std::string& key) const { return values_.count(key) > 0; }
  [[nodiscard]] const std::map<std::string, std::string>& values() const { return values_; }
  [[nodiscard]] const std::string& command() const { return command_; }

  [[nodiscard]] std::string get(const std::string& key, const std::string& fallback = "") const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }
  [[nodiscard]] std::string require(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw InputError("missing config key '" + key + "'");
    return it->second;
  }

  [[nodiscard]] std::string canonical() const {
    std::string s = "command=" + command_ + "\n";
    for (const auto& [k, v] : values_) s += k + "=" + v + "\n";
    return s;
  }
  [[nodiscard]] std::string hash() const { return hex64(fnv1a(canonical())); }
  [[nodiscard]] std::uint64_t seed() const { return std::stoull(get("seed", "0")); }

  /// {tool, version, command, config_hash, seed}
  [[nodiscard]] nlohmann::json meta() const {
    return {{"tool", "rotflow"}, {"version", version()}, {"command", command_}, {"config_hash", hash()}, {"seed", seed()}};
  }
  /// One comment line for CSV/text outputs.
  [[nodiscard]] std::string header_line(const std::string& comment = "#") const {
    return comment + " rotflow " + version() + " command=" + command_ + " config_hash=" + hash() + " seed=" + std::to_string(seed()) + "\n";
  }

 private:
  std::string command_;
  std::map<std::string, std::string> values_;
};

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

/// key = value lines; '#' starts a comment; later keys override earlier ones.
inline std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw InputError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(std::string_view(t).substr(0, eq));
    if (key.empty()) throw InputError("config line " + std::to_string(lineno) + ": empty key");
    out[key] = trim(std::string_view(t).substr(eq + 1));
  }
  return out;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline std::vector<std::string> split_list(const std::string& s, char sep = ',') {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) {
    const std::string t = trim(cur);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

inline std::vector<Rational> parse_rational_list(const std::string& s) {
  std::vector<Rational> out;
  for (const auto& t : split_list(s)) out.push_back(parse_rational(t));
  return out;
}

inline std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  for (const auto& t : split_list(s)) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(t, &used);
    } catch (const std::exception&) {
      throw InputError("not a number: '" + t + "'");
    }
    if (used != t.size()) throw InputError("not a number: '" + t + "'");
    out.push_back(v);
  }
  return out;
}

inline std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  for (const auto& t : split_list(s)) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(t, &used);
    } catch (const std::exception&) {
      throw InputError("not an integer: '" + t + "'");
    }
    if (used != t.size()) throw InputError("not an integer: '" + t + "'");
    out.push_back(v);
  }
  return out;
}

}  // namespace rotflow
