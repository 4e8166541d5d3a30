#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace spsfg {

// A small TOML subset: [section.name] headers, `key = value` lines, '#'
// comments. Values are numbers, booleans, "strings" or [number, ...] arrays.
// Sections and keys keep file order.

using ConfigValue = std::variant<double, bool, std::string, std::vector<double>>;

struct ConfigEntry {
  std::string key;
  ConfigValue value;
  int line = 0;
};

struct ConfigSection {
  std::string name;
  std::vector<ConfigEntry> entries;
  int line = 0;
};

struct ConfigText {
  std::vector<ConfigSection> sections;

  const ConfigSection* find(std::string_view name) const;
  std::vector<const ConfigSection*> with_prefix(std::string_view prefix) const;
};

/// Throws ValidationError listing every malformed line.
ConfigText parse_config_text(std::string_view text);

std::string read_text_file(const std::string& path);

/// Typed, bookkeeping accessor over one section. Every lookup marks the key as
/// known; `finish()` reports unknown keys. Problems accumulate in the shared
/// error list so that a whole document is diagnosed in one pass.
class SectionReader {
 public:
  SectionReader(const ConfigSection* section, std::string name,
                std::vector<std::string>& errors);

  bool present() const { return section_ != nullptr; }
  bool has(std::string_view key) const;

  std::optional<double> number(std::string_view key, bool required = true);
  double number_or(std::string_view key, double fallback);
  std::optional<std::string> text(std::string_view key, bool required = true);
  std::string text_or(std::string_view key, std::string fallback);
  std::optional<std::vector<double>> numbers(std::string_view key, bool required = true);

  /// All entries as (key, number) pairs in file order, marking them known.
  std::vector<std::pair<std::string, double>> all_numbers();

  void finish();

 private:
  const ConfigEntry* lookup(std::string_view key, bool required);

  const ConfigSection* section_;
  std::string name_;
  std::vector<std::string>& errors_;
  std::vector<std::string> seen_;
};

/// Shortest round-trip representation, '.' decimal separator, no locale.
std::string format_number(double value);

/// 64-bit FNV-1a, rendered as 16 hex digits.
std::string fnv1a_hex(std::string_view data);

}  // namespace spsfg
