#pragma once

#include "gcosamp/common.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>

namespace gcosamp {

/// Sectioned key=value text:
///
///   # comment
///   [problem]
///   m = 200
///
/// Keys outside any section are rejected. Later duplicates override earlier ones.
class Config {
 public:
  using Section = std::map<std::string, std::string>;

  static Config parse(std::istream& in) {
    Config cfg;
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') throw ConfigError("line " + std::to_string(line_no) + ": unterminated section header");
        section = trim(line.substr(1, line.size() - 2));
        if (section.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty section name");
        cfg.sections_[section];
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
      if (section.empty()) throw ConfigError("line " + std::to_string(line_no) + ": key outside of a section");
      const std::string key = trim(line.substr(0, eq));
      if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
      cfg.sections_[section][key] = trim(line.substr(eq + 1));
    }
    return cfg;
  }

  static Config parse_string(const std::string& text) {
    std::istringstream in(text);
    return parse(in);
  }

  static Config load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path);
    return parse(in);
  }

  bool has(const std::string& section, const std::string& key) const {
    auto s = sections_.find(section);
    return s != sections_.end() && s->second.count(key) > 0;
  }

  bool has_section(const std::string& section) const { return sections_.count(section) > 0; }

  void set(const std::string& section, const std::string& key, const std::string& value) {
    sections_[section][key] = value;
  }

  std::string get_string(const std::string& section, const std::string& key) const {
    if (!has(section, key)) throw ConfigError("missing [" + section + "] " + key);
    return sections_.at(section).at(key);
  }

  std::string get_string(const std::string& section, const std::string& key, const std::string& fallback) const {
    return has(section, key) ? sections_.at(section).at(key) : fallback;
  }

  long get_int(const std::string& section, const std::string& key) const {
    return to_int(section, key, get_string(section, key));
  }
  long get_int(const std::string& section, const std::string& key, long fallback) const {
    return has(section, key) ? get_int(section, key) : fallback;
  }

  double get_double(const std::string& section, const std::string& key) const {
    return to_double(section, key, get_string(section, key));
  }
  double get_double(const std::string& section, const std::string& key, double fallback) const {
    return has(section, key) ? get_double(section, key) : fallback;
  }

  /// Comma- or space-separated integer list.
  std::vector<long> get_int_list(const std::string& section, const std::string& key) const {
    std::string raw = get_string(section, key);
    std::replace(raw.begin(), raw.end(), ',', ' ');
    std::istringstream in(raw);
    std::vector<long> out;
    std::string tok;
    while (in >> tok) out.push_back(to_int(section, key, tok));
    return out;
  }

  /// Rejects keys in `section` that are not in `allowed`.
  void check_keys(const std::string& section, const std::set<std::string>& allowed) const {
    auto s = sections_.find(section);
    if (s == sections_.end()) return;
    for (const auto& [key, value] : s->second)
      if (!allowed.count(key)) throw ConfigError("unknown key [" + section + "] " + key);
  }

  void write(std::ostream& out) const {
    bool first = true;
    for (const auto& [name, entries] : sections_) {
      if (!first) out << '\n';
      first = false;
      out << '[' << name << "]\n";
      for (const auto& [key, value] : entries) out << key << " = " << value << '\n';
    }
  }

  const std::map<std::string, Section>& sections() const { return sections_; }

 private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
  }

  static long to_int(const std::string& section, const std::string& key, const std::string& v) {
    try {
      std::size_t pos = 0;
      // accept scientific notation for integral values such as 2e5
      const double d = std::stod(v, &pos);
      if (pos != v.size() || d != std::floor(d)) throw std::invalid_argument(v);
      return static_cast<long>(d);
    } catch (const std::exception&) {
      throw ConfigError("[" + section + "] " + key + ": expected an integer, got '" + v + "'");
    }
  }

  static double to_double(const std::string& section, const std::string& key, const std::string& v) {
    try {
      std::size_t pos = 0;
      const double d = std::stod(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      return d;
    } catch (const std::exception&) {
      throw ConfigError("[" + section + "] " + key + ": expected a number, got '" + v + "'");
    }
  }

  std::map<std::string, Section> sections_;
};

}  // namespace gcosamp
