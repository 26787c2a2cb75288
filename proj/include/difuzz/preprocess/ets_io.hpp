#pragma once

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>

#include "difuzz/preprocess/ets.hpp"
#include "difuzz/util/toml.hpp"

namespace difuzz::pre {

struct SchemaError : std::runtime_error {
  SchemaError(int line, const std::string& msg)
      : std::runtime_error("ets.toml line " + std::to_string(line) + ": " + msg), line(line) {}
  int line;
};

namespace detail {

inline std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string toml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') { out += "\\n"; continue; }
    out += c;
  }
  return out;
}

}  // namespace detail

inline std::string write_ets_toml(const EnhancedTargetSequence& ets) {
  std::string out;
  out += "max_block_distance = " + std::to_string(ets.max_block_distance) + "\n";
  for (const auto& t : ets.targets) {
    out += "\n[[target]]\n";
    out += "id = \"" + detail::toml_escape(t.id) + "\"\n";
    out += "file = \"" + detail::toml_escape(t.file) + "\"\n";
    out += "line = " + std::to_string(t.line) + "\n";
    out += "timeout_s = " + detail::fmt_double(t.timeout_s) + "\n";
  }
  for (const auto& b : ets.blocks) {
    out += "\n[[block]]\n";
    out += "block_id = " + std::to_string(b.block_id) + "\n";
    out += "file = \"" + detail::toml_escape(b.file) + "\"\n";
    out += "function = \"" + detail::toml_escape(b.function) + "\"\n";
    out += "occurrence = " + std::to_string(b.occurrence) + "\n";
    out += "cfg_block = " + std::to_string(b.cfg_block) + "\n";
    out += "start_line = " + std::to_string(b.start_line) + "\n";
    out += "end_line = " + std::to_string(b.end_line) + "\n";
    out += "weight = " + detail::fmt_double(b.weight) + "\n";
  }
  return out;
}

inline void write_ets_toml(const EnhancedTargetSequence& ets, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << write_ets_toml(ets);
}

inline EnhancedTargetSequence parse_ets_toml(const std::string& text) {
  toml::Document doc;
  try {
    doc = toml::parse(text);
  } catch (const toml::Error& e) {
    throw SchemaError(e.line, e.what());
  }
  auto check_keys = [](const toml::Table& t, std::set<std::string> allowed,
                       const char* what) {
    for (const auto& [k, v] : t.entries) {
      (void)v;
      if (!allowed.count(k)) {
        int line = t.lines.count(k) ? t.lines.at(k) : 0;
        throw SchemaError(line, std::string("unknown key '") + k + "' in " + what);
      }
    }
    for (const auto& k : allowed)
      if (!t.has(k)) throw SchemaError(0, std::string("missing key '") + k + "' in " + what);
  };

  EnhancedTargetSequence ets;
  check_keys(doc.root, {"max_block_distance"}, "document root");
  ets.max_block_distance = static_cast<int>(doc.root.get_int("max_block_distance"));

  for (const auto& [name, tables] : doc.arrays) {
    if (name != "target" && name != "block")
      throw SchemaError(0, "unknown section [[" + name + "]]");
    (void)tables;
  }
  if (doc.arrays.count("target")) {
    for (const auto& t : doc.arrays.at("target")) {
      check_keys(t, {"id", "file", "line", "timeout_s"}, "[[target]]");
      TargetPoint tp;
      tp.id = t.get_string("id");
      tp.file = t.get_string("file");
      tp.line = static_cast<int>(t.get_int("line"));
      tp.timeout_s = t.get_float("timeout_s");
      if (tp.line < 1) throw SchemaError(t.lines.at("line"), "line must be >= 1");
      if (tp.timeout_s <= 0) throw SchemaError(t.lines.at("timeout_s"), "timeout must be > 0");
      ets.targets.push_back(std::move(tp));
    }
  }
  std::set<int> seen_ids;
  if (doc.arrays.count("block")) {
    for (const auto& t : doc.arrays.at("block")) {
      check_keys(t,
                 {"block_id", "file", "function", "occurrence", "cfg_block", "start_line",
                  "end_line", "weight"},
                 "[[block]]");
      EtsBlock b;
      b.block_id = static_cast<int>(t.get_int("block_id"));
      b.file = t.get_string("file");
      b.function = t.get_string("function");
      b.occurrence = static_cast<int>(t.get_int("occurrence"));
      b.cfg_block = static_cast<int>(t.get_int("cfg_block"));
      b.start_line = static_cast<int>(t.get_int("start_line"));
      b.end_line = static_cast<int>(t.get_int("end_line"));
      b.weight = t.get_float("weight");
      if (b.block_id < 1) throw SchemaError(t.lines.at("block_id"), "block_id must be >= 1");
      if (!seen_ids.insert(b.block_id).second)
        throw SchemaError(t.lines.at("block_id"),
                          "duplicate block_id " + std::to_string(b.block_id));
      if (!(b.weight > 0.0 && b.weight <= 1.0))
        throw SchemaError(t.lines.at("weight"), "weight must be in (0, 1]");
      ets.blocks.push_back(std::move(b));
    }
  }
  return ets;
}

inline EnhancedTargetSequence read_ets_toml(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_ets_toml(ss.str());
}

}  // namespace difuzz::pre
