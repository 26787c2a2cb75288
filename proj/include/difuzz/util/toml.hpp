#pragma once

#include <cctype>
#include <map>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace difuzz::toml {

// Minimal TOML subset: top-level `key = value` pairs and `[[name]]`
// array-of-table sections. Values: integers, floats, booleans, quoted
// strings, and arrays of quoted strings. Enough for ets.toml and
// bench.toml; anything outside the subset is an error.

struct Error : std::runtime_error {
  Error(int line, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line) + ": " + msg), line(line) {}
  int line;
};

using Value = std::variant<std::int64_t, double, bool, std::string, std::vector<std::string>>;

struct Table {
  std::map<std::string, Value> entries;
  std::map<std::string, int> lines;  // key -> source line, for error reporting

  bool has(const std::string& k) const { return entries.count(k) != 0; }

  std::int64_t get_int(const std::string& k) const {
    return std::get<std::int64_t>(require(k));
  }
  double get_float(const std::string& k) const {
    const Value& v = require(k);
    if (std::holds_alternative<std::int64_t>(v))
      return static_cast<double>(std::get<std::int64_t>(v));
    return std::get<double>(v);
  }
  const std::string& get_string(const std::string& k) const {
    return std::get<std::string>(require(k));
  }
  const std::vector<std::string>& get_string_array(const std::string& k) const {
    return std::get<std::vector<std::string>>(require(k));
  }

  const Value& require(const std::string& k) const {
    auto it = entries.find(k);
    if (it == entries.end())
      throw Error(0, "missing key '" + k + "'");
    return it->second;
  }
};

struct Document {
  Table root;
  // Section name -> array of tables, in file order.
  std::map<std::string, std::vector<Table>> arrays;
  std::vector<std::pair<std::string, std::size_t>> section_order;
};

namespace detail {

inline std::string strip(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline Value parse_value(const std::string& raw, int line) {
  std::string v = strip(raw);
  if (v.empty()) throw Error(line, "empty value");
  if (v.front() == '"') {
    if (v.size() < 2 || v.back() != '"')
      throw Error(line, "unterminated string");
    std::string out;
    for (std::size_t i = 1; i + 1 < v.size(); ++i) {
      char c = v[i];
      if (c == '\\') {
        if (i + 2 >= v.size()) throw Error(line, "bad escape");
        char n = v[++i];
        switch (n) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          default: throw Error(line, "bad escape");
        }
      } else {
        out += c;
      }
    }
    return out;
  }
  if (v.front() == '[') {
    if (v.back() != ']') throw Error(line, "unterminated array");
    std::vector<std::string> items;
    std::string inner = v.substr(1, v.size() - 2);
    std::size_t pos = 0;
    while (pos < inner.size()) {
      while (pos < inner.size() && (inner[pos] == ' ' || inner[pos] == '\t' || inner[pos] == ','))
        ++pos;
      if (pos >= inner.size()) break;
      if (inner[pos] != '"') throw Error(line, "array elements must be strings");
      std::size_t end = inner.find('"', pos + 1);
      if (end == std::string::npos) throw Error(line, "unterminated string in array");
      items.push_back(inner.substr(pos + 1, end - pos - 1));
      pos = end + 1;
    }
    return items;
  }
  if (v == "true") return true;
  if (v == "false") return false;
  bool is_float = v.find('.') != std::string::npos || v.find('e') != std::string::npos ||
                  v.find('E') != std::string::npos;
  try {
    std::size_t used = 0;
    if (is_float) {
      double d = std::stod(v, &used);
      if (used != v.size()) throw Error(line, "trailing characters after number");
      return d;
    }
    std::int64_t n = std::stoll(v, &used);
    if (used != v.size()) throw Error(line, "trailing characters after number");
    return n;
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    throw Error(line, "bad value '" + v + "'");
  }
}

}  // namespace detail

inline Document parse(const std::string& text) {
  Document doc;
  Table* current = &doc.root;
  int lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string line = text.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
    pos = nl == std::string::npos ? text.size() + 1 : nl + 1;
    ++lineno;
    std::string s = detail::strip(line);
    if (s.empty() || s.front() == '#') continue;
    if (s.front() == '[') {
      if (s.size() > 4 && s.substr(0, 2) == "[[" && s.substr(s.size() - 2) == "]]") {
        std::string name = detail::strip(s.substr(2, s.size() - 4));
        if (name.empty()) throw Error(lineno, "empty section name");
        auto& arr = doc.arrays[name];
        arr.emplace_back();
        doc.section_order.emplace_back(name, arr.size() - 1);
        current = &arr.back();
        continue;
      }
      throw Error(lineno, "only [[section]] tables are supported");
    }
    std::size_t eq = s.find('=');
    if (eq == std::string::npos) throw Error(lineno, "expected key = value");
    std::string key = detail::strip(s.substr(0, eq));
    if (key.empty()) throw Error(lineno, "empty key");
    for (char c : key)
      if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_')
        throw Error(lineno, "bad key '" + key + "'");
    if (current->entries.count(key))
      throw Error(lineno, "duplicate key '" + key + "'");
    current->entries[key] = detail::parse_value(s.substr(eq + 1), lineno);
    current->lines[key] = lineno;
  }
  return doc;
}

}  // namespace difuzz::toml
