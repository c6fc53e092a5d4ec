#pragma once

#include <map>
#include <optional>
#include <string>

#include "json.hpp"

namespace neurite {

// Flat TOML subset: [section] headers, key = value lines with numbers,
// booleans and double-quoted strings, '#' comments. That covers the scalar
// configuration this tool needs; nested tables and arrays are rejected.
class TomlConfig {
 public:
  static TomlConfig parse(const std::string& text);
  static TomlConfig parse_file(const std::string& path);

  std::optional<double> get_double(const std::string& section, const std::string& key) const;
  std::optional<std::int64_t> get_int(const std::string& section, const std::string& key) const;
  std::optional<bool> get_bool(const std::string& section, const std::string& key) const;
  std::optional<std::string> get_string(const std::string& section, const std::string& key) const;

  bool empty() const { return values_.empty(); }
  nlohmann::json to_json() const;

 private:
  std::map<std::string, std::map<std::string, std::string>> values_;
};

}  // namespace neurite
