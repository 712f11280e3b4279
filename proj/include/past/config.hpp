#pragma once

// Flat TOML-style experiment files:
//
//   # comment
//   [section]
//   key = 1.5
//   name = "text"
//   flag = true
//   grid = [0, 0.25, 0.5]
//   methods = ["past", "naive"]
//
// Keys are addressed as "section.key". Every key must be read by the consumer;
// leftovers are reported as configuration errors, which catches typos.

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace past {

class Config {
 public:
  using Value = std::variant<double, bool, std::string, std::vector<double>, std::vector<std::string>>;

  /// Throws ConfigError with a line number on malformed input.
  static Config parse(std::string_view text, std::string source = "<config>");
  static Config load(const std::filesystem::path& path);

  bool has(const std::string& key) const;
  void set(const std::string& key, Value v);

  double get_double(const std::string& key, double fallback) const;
  double get_double(const std::string& key) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  std::int64_t get_int(const std::string& key) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::string get_string(const std::string& key) const;
  /// A scalar number is accepted as a one-element list.
  std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback) const;
  std::vector<std::string> get_strings(const std::string& key, const std::vector<std::string>& fallback) const;

  /// Keys never read through a getter.
  std::vector<std::string> unused_keys() const;
  /// Throws ConfigError listing unused keys.
  void require_all_used() const;

  const std::map<std::string, Value>& values() const noexcept { return values_; }
  const std::string& source() const noexcept { return source_; }

 private:
  const Value* find(const std::string& key) const;
  [[noreturn]] void type_error(const std::string& key, const char* expected) const;

  std::map<std::string, Value> values_;
  mutable std::set<std::string> used_;
  std::string source_;
};

}  // namespace past
