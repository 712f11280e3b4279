#include "past/config.hpp"

#include "past/common.hpp"
#include "past/csv.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace past {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Drops a trailing # comment that is not inside quotes.
std::string_view strip_comment(std::string_view s) {
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') quoted = !quoted;
    if (s[i] == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}

bool valid_key(std::string_view k) {
  if (k.empty()) return false;
  for (char c : k)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) return false;
  return true;
}

struct Parser {
  std::string source;
  int line = 0;

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError(source + ":" + std::to_string(line) + ": " + what);
  }

  std::string parse_string(std::string_view s) const {
    if (s.size() < 2 || s.front() != '"' || s.back() != '"') fail("unterminated string");
    const std::string_view body = s.substr(1, s.size() - 2);
    if (body.find('"') != std::string_view::npos) fail("embedded quotes are not supported");
    return std::string(body);
  }

  double parse_number(std::string_view s) const {
    try {
      return csv::parse_double(s);
    } catch (const Error&) {
      fail("expected a number, got '" + std::string(s) + "'");
    }
  }

  Config::Value parse_value(std::string_view s) const {
    s = trim(s);
    if (s.empty()) fail("missing value");
    if (s == "true") return true;
    if (s == "false") return false;
    if (s.front() == '"') return parse_string(s);
    if (s.front() == '[') {
      if (s.back() != ']') fail("unterminated list");
      const std::string_view body = trim(s.substr(1, s.size() - 2));
      std::vector<std::string_view> items;
      std::size_t start = 0;
      bool quoted = false;
      for (std::size_t i = 0; i <= body.size(); ++i) {
        if (i < body.size() && body[i] == '"') quoted = !quoted;
        if (i == body.size() || (body[i] == ',' && !quoted)) {
          const auto item = trim(body.substr(start, i - start));
          if (!item.empty()) items.push_back(item);
          else if (i < body.size()) fail("empty list element");
          start = i + 1;
        }
      }
      if (items.empty()) return std::vector<double>{};
      if (items.front().front() == '"') {
        std::vector<std::string> out;
        for (auto it : items) {
          if (it.front() != '"') fail("mixed list element types");
          out.push_back(parse_string(it));
        }
        return out;
      }
      std::vector<double> out;
      for (auto it : items) out.push_back(parse_number(it));
      return out;
    }
    return parse_number(s);
  }
};

}  // namespace

Config Config::parse(std::string_view text, std::string source) {
  Config cfg;
  cfg.source_ = source;
  Parser p{std::move(source)};
  std::string section;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++p.line;
    const std::string_view ln = trim(strip_comment(raw));
    if (ln.empty()) continue;
    if (ln.front() == '[') {
      if (ln.back() != ']') p.fail("malformed section header");
      section = std::string(trim(ln.substr(1, ln.size() - 2)));
      if (!valid_key(section)) p.fail("invalid section name '" + section + "'");
      continue;
    }
    const auto eq = ln.find('=');
    if (eq == std::string_view::npos) p.fail("expected key = value");
    const std::string key(trim(ln.substr(0, eq)));
    if (!valid_key(key)) p.fail("invalid key '" + key + "'");
    const std::string full = section.empty() ? key : section + "." + key;
    if (cfg.values_.count(full)) p.fail("duplicate key '" + full + "'");
    cfg.values_[full] = p.parse_value(ln.substr(eq + 1));
  }
  return cfg;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

bool Config::has(const std::string& key) const { return values_.count(key) > 0; }

void Config::set(const std::string& key, Value v) { values_[key] = std::move(v); }

const Config::Value* Config::find(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return nullptr;
  used_.insert(key);
  return &it->second;
}

void Config::type_error(const std::string& key, const char* expected) const {
  throw ConfigError(source_ + ": key '" + key + "' must be " + expected);
}

double Config::get_double(const std::string& key, double fallback) const {
  const Value* v = find(key);
  if (!v) return fallback;
  if (const auto* d = std::get_if<double>(v)) return *d;
  type_error(key, "a number");
}

double Config::get_double(const std::string& key) const {
  if (!has(key)) throw ConfigError(source_ + ": missing required key '" + key + "'");
  return get_double(key, 0.0);
}

std::int64_t Config::get_int(const std::string& key, std::int64_t fallback) const {
  const Value* v = find(key);
  if (!v) return fallback;
  const auto* d = std::get_if<double>(v);
  if (!d || std::floor(*d) != *d || std::abs(*d) > 9.0e15) type_error(key, "an integer");
  return static_cast<std::int64_t>(*d);
}

std::int64_t Config::get_int(const std::string& key) const {
  if (!has(key)) throw ConfigError(source_ + ": missing required key '" + key + "'");
  return get_int(key, 0);
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  const Value* v = find(key);
  if (!v) return fallback;
  if (const auto* b = std::get_if<bool>(v)) return *b;
  type_error(key, "true or false");
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  const Value* v = find(key);
  if (!v) return fallback;
  if (const auto* s = std::get_if<std::string>(v)) return *s;
  type_error(key, "a quoted string");
}

std::string Config::get_string(const std::string& key) const {
  if (!has(key)) throw ConfigError(source_ + ": missing required key '" + key + "'");
  return get_string(key, "");
}

std::vector<double> Config::get_doubles(const std::string& key, const std::vector<double>& fallback) const {
  const Value* v = find(key);
  if (!v) return fallback;
  if (const auto* l = std::get_if<std::vector<double>>(v)) return *l;
  if (const auto* d = std::get_if<double>(v)) return {*d};
  type_error(key, "a list of numbers");
}

std::vector<std::string> Config::get_strings(const std::string& key, const std::vector<std::string>& fallback) const {
  const Value* v = find(key);
  if (!v) return fallback;
  if (const auto* l = std::get_if<std::vector<std::string>>(v)) return *l;
  if (const auto* s = std::get_if<std::string>(v)) return {*s};
  if (const auto* e = std::get_if<std::vector<double>>(v); e && e->empty()) return {};
  type_error(key, "a list of strings");
}

std::vector<std::string> Config::unused_keys() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : values_)
    if (!used_.count(k)) out.push_back(k);
  return out;
}

void Config::require_all_used() const {
  const auto unused = unused_keys();
  if (unused.empty()) return;
  std::string msg = source_ + ": unknown key(s):";
  for (const auto& k : unused) msg += " " + k;
  throw ConfigError(msg);
}

}  // namespace past
