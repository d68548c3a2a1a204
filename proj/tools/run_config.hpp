#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ua::cli {

struct ConfigKey {
  std::string_view key;  // section.name
  std::string_view fallback;
  std::string_view help;
};

// Every key a run config may set, with its default.
const std::vector<ConfigKey>& config_schema();

// Flat `key = value` file with [section] headers (INI). Lookups fall back to
// the schema default.
class RunConfig {
 public:
  RunConfig() = default;
  // Throws ConfigError on a syntax error or a key outside the schema.
  static RunConfig parse(std::istream& in);
  // Throws InputError if the file cannot be opened.
  static RunConfig load(const std::filesystem::path& path);

  bool has(std::string_view key) const;
  // Explicit value, else the schema default. Throws ConfigError for a key
  // outside the schema or a value of the wrong type.
  std::string text(std::string_view key) const;
  double number(std::string_view key) const;
  int integer(std::string_view key) const;
  std::uint64_t seed(std::string_view key) const;
  bool flag(std::string_view key) const;
  // Throws ConfigError naming the key when it has no explicit value.
  std::string required(std::string_view key) const;

  void set(std::string_view key, std::string value);

 private:
  std::map<std::string, std::string, std::less<>> values_;
};

}  // namespace ua::cli
