#include "spsfg/config_text.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "spsfg/error.hpp"

namespace spsfg {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool valid_name(std::string_view s, bool allow_dots) {
  if (s.empty()) return false;
  for (char c : s) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' ||
                    (allow_dots && c == '.');
    if (!ok) return false;
  }
  return true;
}

// Strip a trailing comment that is not inside a string literal.
std::string_view strip_comment(std::string_view s) {
  bool in_string = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') in_string = !in_string;
    if (s[i] == '#' && !in_string) return s.substr(0, i);
  }
  return s;
}

std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  std::string buf;
  buf.reserve(s.size());
  for (char c : s)
    if (c != '_') buf.push_back(c);
  if (buf.front() == '+') buf.erase(buf.begin());
  double value = 0;
  const auto* first = buf.data();
  const auto* last = buf.data() + buf.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) return std::nullopt;
  return value;
}

std::optional<ConfigValue> parse_value(std::string_view raw, std::string& why) {
  raw = trim(raw);
  if (raw.empty()) {
    why = "missing value";
    return std::nullopt;
  }
  if (raw.front() == '"') {
    if (raw.size() < 2 || raw.back() != '"') {
      why = "unterminated string";
      return std::nullopt;
    }
    return ConfigValue{std::string(raw.substr(1, raw.size() - 2))};
  }
  if (raw == "true") return ConfigValue{true};
  if (raw == "false") return ConfigValue{false};
  if (raw.front() == '[') {
    if (raw.back() != ']') {
      why = "unterminated array";
      return std::nullopt;
    }
    std::vector<double> items;
    auto body = trim(raw.substr(1, raw.size() - 2));
    while (!body.empty()) {
      const auto comma = body.find(',');
      const auto item = trim(body.substr(0, comma));
      if (!item.empty()) {
        auto v = parse_double(item);
        if (!v) {
          why = "array element '" + std::string(item) + "' is not a number";
          return std::nullopt;
        }
        items.push_back(*v);
      }
      if (comma == std::string_view::npos) break;
      body = body.substr(comma + 1);
    }
    return ConfigValue{std::move(items)};
  }
  if (auto v = parse_double(raw)) return ConfigValue{*v};
  why = "cannot parse value '" + std::string(raw) + "'";
  return std::nullopt;
}

std::string join(const std::vector<std::string>& items, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

}  // namespace

const ConfigSection* ConfigText::find(std::string_view name) const {
  for (const auto& s : sections)
    if (s.name == name) return &s;
  return nullptr;
}

std::vector<const ConfigSection*> ConfigText::with_prefix(std::string_view prefix) const {
  std::vector<const ConfigSection*> out;
  for (const auto& s : sections)
    if (s.name.size() > prefix.size() && s.name.compare(0, prefix.size(), prefix) == 0)
      out.push_back(&s);
  return out;
}

ConfigText parse_config_text(std::string_view text) {
  ConfigText doc;
  std::vector<std::string> errors;
  ConfigSection* current = nullptr;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto eol = text.find('\n', pos);
    auto line = text.substr(pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') {
        errors.push_back(where + "malformed section header");
        continue;
      }
      auto name = trim(line.substr(1, line.size() - 2));
      if (!valid_name(name, true)) {
        errors.push_back(where + "invalid section name '" + std::string(name) + "'");
        continue;
      }
      if (doc.find(name)) {
        errors.push_back(where + "duplicate section [" + std::string(name) + "]");
        current = nullptr;
        continue;
      }
      doc.sections.push_back({std::string(name), {}, line_no});
      current = &doc.sections.back();
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      errors.push_back(where + "expected 'key = value'");
      continue;
    }
    const auto key = trim(line.substr(0, eq));
    if (!valid_name(key, false)) {
      errors.push_back(where + "invalid key '" + std::string(key) + "'");
      continue;
    }
    if (!current) {
      errors.push_back(where + "key '" + std::string(key) + "' outside any section");
      continue;
    }
    std::string why;
    auto value = parse_value(line.substr(eq + 1), why);
    if (!value) {
      errors.push_back(where + why);
      continue;
    }
    const bool dup = std::any_of(current->entries.begin(), current->entries.end(),
                                 [&](const ConfigEntry& e) { return e.key == key; });
    if (dup) {
      errors.push_back(where + "duplicate key '" + std::string(key) + "' in [" + current->name + "]");
      continue;
    }
    current->entries.push_back({std::string(key), std::move(*value), line_no});
  }
  if (!errors.empty()) throw ValidationError("config syntax: " + join(errors, "; "));
  return doc;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SectionReader::SectionReader(const ConfigSection* section, std::string name,
                             std::vector<std::string>& errors)
    : section_(section), name_(std::move(name)), errors_(errors) {}

bool SectionReader::has(std::string_view key) const {
  if (!section_) return false;
  return std::any_of(section_->entries.begin(), section_->entries.end(),
                     [&](const ConfigEntry& e) { return e.key == key; });
}

const ConfigEntry* SectionReader::lookup(std::string_view key, bool required) {
  seen_.emplace_back(key);
  if (section_) {
    for (const auto& e : section_->entries)
      if (e.key == key) return &e;
  }
  if (required) errors_.push_back("missing [" + name_ + "] " + std::string(key));
  return nullptr;
}

std::optional<double> SectionReader::number(std::string_view key, bool required) {
  const auto* e = lookup(key, required);
  if (!e) return std::nullopt;
  if (const auto* d = std::get_if<double>(&e->value)) return *d;
  errors_.push_back("[" + name_ + "] " + std::string(key) + " must be a number (line " +
                    std::to_string(e->line) + ")");
  return std::nullopt;
}

double SectionReader::number_or(std::string_view key, double fallback) {
  return number(key, false).value_or(fallback);
}

std::optional<std::string> SectionReader::text(std::string_view key, bool required) {
  const auto* e = lookup(key, required);
  if (!e) return std::nullopt;
  if (const auto* s = std::get_if<std::string>(&e->value)) return *s;
  errors_.push_back("[" + name_ + "] " + std::string(key) + " must be a string (line " +
                    std::to_string(e->line) + ")");
  return std::nullopt;
}

std::string SectionReader::text_or(std::string_view key, std::string fallback) {
  return text(key, false).value_or(std::move(fallback));
}

std::optional<std::vector<double>> SectionReader::numbers(std::string_view key, bool required) {
  const auto* e = lookup(key, required);
  if (!e) return std::nullopt;
  if (const auto* v = std::get_if<std::vector<double>>(&e->value)) return *v;
  errors_.push_back("[" + name_ + "] " + std::string(key) + " must be an array of numbers (line " +
                    std::to_string(e->line) + ")");
  return std::nullopt;
}

std::vector<std::pair<std::string, double>> SectionReader::all_numbers() {
  std::vector<std::pair<std::string, double>> out;
  if (!section_) return out;
  for (const auto& e : section_->entries) {
    if (auto v = number(e.key)) out.emplace_back(e.key, *v);
  }
  return out;
}

void SectionReader::finish() {
  if (!section_) return;
  for (const auto& e : section_->entries) {
    if (std::find(seen_.begin(), seen_.end(), e.key) == seen_.end())
      errors_.push_back("unknown key [" + name_ + "] " + e.key + " (line " +
                        std::to_string(e.line) + ")");
  }
}

std::string format_number(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, ptr);
}

std::string fnv1a_hex(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace spsfg
