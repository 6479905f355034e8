#pragma once

// Config-driven front end. `run` is the whole program minus process setup, so
// tests can drive it in-process.

#include "lieop/errors.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace lieop::cli {

inline constexpr const char* kSchema = "lieop-report/1";
inline constexpr const char* kVersion = "0.1.0";

/// Bad config or bad command line; exit code 2. Line and column are 1-based,
/// 0 when not tied to a config position.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& message, std::size_t line, std::size_t column)
      : Error(line ? "config:" + std::to_string(line) + ":" + std::to_string(column) + ": " + message : message),
        line_(line),
        column_(column) {}
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_, column_;
};

struct ConfigEntry {
  std::string key;
  std::string value;
  std::size_t line = 0;
  std::size_t key_column = 0;
  std::size_t value_column = 0;
};

struct ConfigSection {
  std::string name;
  std::size_t line = 0;
  std::vector<ConfigEntry> entries;

  const ConfigEntry* find(std::string_view key) const;
};

/// `[section]` headers, `key = value` lines, `#` comments. Keys outside a
/// section, duplicate sections and duplicate keys are errors.
struct Config {
  std::vector<ConfigSection> sections;
  const ConfigSection* section(std::string_view name) const;
};

Config parse_config(std::string_view text);

/// 64-bit FNV-1a, printed as 16 hex digits.
std::string fnv1a_hex(std::string_view bytes);

/// argv without the program name. Exit 0 when every verdict passes, 1 when one
/// fails, 2 on config or usage errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lieop::cli
