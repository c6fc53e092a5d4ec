#include "neurite/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "neurite/error.hpp"

namespace neurite {

namespace {

std::string strip(const std::string& s) {
  const std::size_t a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  const std::size_t b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

// removes a trailing comment that is not inside a quoted string
std::string strip_comment(const std::string& s) {
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') quoted = !quoted;
    if (s[i] == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}

}  // namespace

TomlConfig TomlConfig::parse(const std::string& text) {
  TomlConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::string section;
  std::size_t line_no = 0;

  while (std::getline(in, line)) {
    ++line_no;
    line = strip(strip_comment(line));
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']')
        throw Error(ErrorCode::InvalidConfig,
                    "config: line " + std::to_string(line_no) + ": unterminated section header");
      section = strip(line.substr(1, line.size() - 2));
      if (section.empty() || section.find('.') != std::string::npos)
        throw Error(ErrorCode::InvalidConfig,
                    "config: line " + std::to_string(line_no) + ": unsupported section name");
      continue;
    }

    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::InvalidConfig,
                  "config: line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = strip(line.substr(0, eq));
    const std::string value = strip(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw Error(ErrorCode::InvalidConfig,
                  "config: line " + std::to_string(line_no) + ": empty key or value");
    if (value.front() == '[' || value.front() == '{')
      throw Error(ErrorCode::InvalidConfig,
                  "config: line " + std::to_string(line_no) + ": arrays/tables unsupported");
    cfg.values_[section][key] = value;
  }
  return cfg;
}

TomlConfig TomlConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw Error(ErrorCode::IoError, "config: cannot open " + path, ErrorKind::Runtime);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::optional<std::string> TomlConfig::get_string(const std::string& section,
                                                  const std::string& key) const {
  auto s = values_.find(section);
  if (s == values_.end()) return std::nullopt;
  auto k = s->second.find(key);
  if (k == s->second.end()) return std::nullopt;
  std::string v = k->second;
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') return v.substr(1, v.size() - 2);
  return v;
}

std::optional<double> TomlConfig::get_double(const std::string& section,
                                             const std::string& key) const {
  const auto raw = get_string(section, key);
  if (!raw) return std::nullopt;
  if (*raw == "inf") return std::numeric_limits<double>::infinity();
  double out = 0.0;
  const char* first = raw->data();
  const char* last = raw->data() + raw->size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last)
    throw Error(ErrorCode::InvalidConfig, "config: [" + section + "] " + key + ": not a number");
  return out;
}

std::optional<std::int64_t> TomlConfig::get_int(const std::string& section,
                                                const std::string& key) const {
  const auto raw = get_string(section, key);
  if (!raw) return std::nullopt;
  std::int64_t out = 0;
  const char* first = raw->data();
  const char* last = raw->data() + raw->size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last)
    throw Error(ErrorCode::InvalidConfig, "config: [" + section + "] " + key + ": not an integer");
  return out;
}

std::optional<bool> TomlConfig::get_bool(const std::string& section,
                                         const std::string& key) const {
  const auto raw = get_string(section, key);
  if (!raw) return std::nullopt;
  if (*raw == "true") return true;
  if (*raw == "false") return false;
  throw Error(ErrorCode::InvalidConfig, "config: [" + section + "] " + key + ": not a boolean");
}

nlohmann::json TomlConfig::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [section, kv] : values_) {
    nlohmann::json s = nlohmann::json::object();
    for (const auto& [k, v] : kv) s[k] = v;
    j[section.empty() ? "(root)" : section] = s;
  }
  return j;
}

}  // namespace neurite
