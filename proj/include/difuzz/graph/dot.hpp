#pragma once

#include <cctype>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "difuzz/graph/graph.hpp"

namespace difuzz::graphs {

struct DotSyntaxError : std::runtime_error {
  DotSyntaxError(int line, const std::string& msg)
      : std::runtime_error("dot:" + std::to_string(line) + ": " + msg), line(line) {}
  int line;
};

namespace detail {

inline void emit_node(const GraphNode& n, std::string& out) {
  out += n.id;
  out += "[shape=record,filename=\"";
  out += n.filename;
  out += "\",startline=";
  out += std::to_string(n.startline);
  out += ",headline=";
  out += std::to_string(n.headline);
  out += ",bbendline=";
  out += std::to_string(n.bbendline);
  out += ",startcolumn=";
  out += std::to_string(n.startcolumn);
  out += ",label=\"{";
  out += n.label;
  out += "}\"];\n";
}

}  // namespace detail

// Record-dialect DOT: one line per node, then the edges grouped by source
// node. CFG nodes are printed in depth-first order from the entry node, call
// graph nodes in declaration order.
inline std::string emit_dot(const ProgramGraph& g) {
  std::vector<const GraphNode*> order;
  std::map<std::string, const GraphNode*> by_id;
  for (const auto& n : g.nodes) by_id[n.id] = &n;
  if (g.kind == ProgramGraph::Kind::ControlFlowGraph && !g.entry.empty()) {
    std::map<std::string, std::vector<std::string>> adj;
    for (const auto& e : g.edges) adj[e.from].push_back(e.to);
    std::set<std::string> seen;
    std::vector<std::string> stack{g.entry};
    // Preorder DFS, successors visited in edge order.
    std::vector<std::string> dfs;
    while (!stack.empty()) {
      std::string cur = stack.back();
      stack.pop_back();
      if (!seen.insert(cur).second) continue;
      dfs.push_back(cur);
      const auto& succ = adj[cur];
      for (auto it = succ.rbegin(); it != succ.rend(); ++it) stack.push_back(*it);
    }
    for (const auto& id : dfs)
      if (by_id.count(id)) order.push_back(by_id.at(id));
    for (const auto& n : g.nodes)  // anything unreachable keeps declaration order
      if (!seen.count(n.id)) order.push_back(&n);
  } else {
    for (const auto& n : g.nodes) order.push_back(&n);
  }

  std::string out;
  for (const GraphNode* n : order)
    if (n->declared) detail::emit_node(*n, out);
  for (const GraphNode* n : order) {
    for (const auto& e : g.edges) {
      if (e.from != n->id) continue;
      out += e.from;
      out += " -> ";
      out += e.to;
      if (e.indirect) out += "[indirect]";
      out += ";\n";
    }
  }
  // Edges whose source has no node record at all.
  for (const auto& e : g.edges) {
    if (by_id.count(e.from)) continue;
    out += e.from;
    out += " -> ";
    out += e.to;
    if (e.indirect) out += "[indirect]";
    out += ";\n";
  }
  return out;
}

namespace detail {

struct DotStatement {
  std::string text;
  int line;
};

// Split on ';' outside quotes; newlines inside quoted strings are kept (the
// published Go snippet wraps a filename across lines).
inline std::vector<DotStatement> split_statements(const std::string& text) {
  std::vector<DotStatement> out;
  std::string cur;
  int line = 1;
  int start_line = 1;
  bool in_quote = false;
  bool has_content = false;
  for (char c : text) {
    if (c == '\n') ++line;
    if (c == '"') in_quote = !in_quote;
    if (!in_quote && c == ';') {
      out.push_back({cur, start_line});
      cur.clear();
      has_content = false;
      continue;
    }
    if (!has_content && !in_quote && (c == '\n' || c == ' ' || c == '\t' || c == '\r')) continue;
    if (!has_content) {
      start_line = line;
      has_content = true;
    }
    cur += c;
  }
  // Trailing non-whitespace without ';' is an error.
  for (char c : cur)
    if (c != '\n' && c != ' ' && c != '\t' && c != '\r')
      throw DotSyntaxError(start_line, "statement not terminated by ';'");
  return out;
}

inline std::string strip_ws(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline bool is_ident(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  return true;
}

inline int parse_int(const std::string& s, int line, const char* what) {
  try {
    std::size_t used = 0;
    int v = std::stoi(s, &used);
    if (used != s.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw DotSyntaxError(line, std::string("bad integer for ") + what + ": '" + s + "'");
  }
}

}  // namespace detail

inline ProgramGraph parse_dot(const std::string& text) {
  ProgramGraph g;
  std::map<std::string, std::size_t> node_index;
  auto ensure_node = [&](const std::string& id) -> GraphNode& {
    auto it = node_index.find(id);
    if (it != node_index.end()) return g.nodes[it->second];
    GraphNode n;
    n.id = id;
    n.declared = false;
    node_index[id] = g.nodes.size();
    g.nodes.push_back(std::move(n));
    return g.nodes.back();
  };

  for (const auto& stmt : detail::split_statements(text)) {
    const std::string& s = stmt.text;
    int line = stmt.line;
    std::size_t arrow = std::string::npos;
    {
      bool q = false;
      for (std::size_t i = 0; i + 1 < s.size(); ++i) {
        if (s[i] == '"') q = !q;
        if (!q && s[i] == '-' && s[i + 1] == '>') {
          arrow = i;
          break;
        }
      }
    }
    if (arrow != std::string::npos) {
      std::string from = detail::strip_ws(s.substr(0, arrow));
      std::string rest = detail::strip_ws(s.substr(arrow + 2));
      bool indirect = false;
      std::size_t br = rest.find('[');
      if (br != std::string::npos) {
        std::string attr = detail::strip_ws(rest.substr(br));
        if (attr != "[indirect]")
          throw DotSyntaxError(line, "unknown edge attribute '" + attr + "'");
        indirect = true;
        rest = detail::strip_ws(rest.substr(0, br));
      }
      if (!detail::is_ident(from) || !detail::is_ident(rest))
        throw DotSyntaxError(line, "bad edge endpoints");
      ensure_node(from);
      ensure_node(rest);
      g.edges.push_back({from, rest, indirect});
      continue;
    }
    std::size_t br = s.find('[');
    if (br == std::string::npos)
      throw DotSyntaxError(line, "expected node record or edge");
    std::string id = detail::strip_ws(s.substr(0, br));
    if (!detail::is_ident(id)) throw DotSyntaxError(line, "bad node id '" + id + "'");
    std::string attrs = detail::strip_ws(s.substr(br));
    if (attrs.size() < 2 || attrs.front() != '[' || attrs.back() != ']')
      throw DotSyntaxError(line, "malformed attribute list");
    attrs = attrs.substr(1, attrs.size() - 2);

    GraphNode node;
    node.id = id;
    std::set<std::string> seen_keys;
    std::size_t pos = 0;
    while (pos < attrs.size()) {
      // key
      std::size_t eq = attrs.find('=', pos);
      if (eq == std::string::npos) throw DotSyntaxError(line, "expected key=value");
      std::string key = detail::strip_ws(attrs.substr(pos, eq - pos));
      // value: quoted string or bare token up to the next top-level comma
      std::size_t vstart = eq + 1;
      while (vstart < attrs.size() && (attrs[vstart] == ' ' || attrs[vstart] == '\t' ||
                                       attrs[vstart] == '\r' || attrs[vstart] == '\n'))
        ++vstart;
      std::string value;
      bool quoted = vstart < attrs.size() && attrs[vstart] == '"';
      if (quoted) {
        std::size_t close = attrs.find('"', vstart + 1);
        if (close == std::string::npos) throw DotSyntaxError(line, "unterminated string");
        value = attrs.substr(vstart + 1, close - vstart - 1);
        pos = close + 1;
      } else {
        std::size_t comma = attrs.find(',', vstart);
        value = detail::strip_ws(
            attrs.substr(vstart, comma == std::string::npos ? std::string::npos : comma - vstart));
        pos = comma == std::string::npos ? attrs.size() : comma;
      }
      while (pos < attrs.size() && (attrs[pos] == ' ' || attrs[pos] == '\t' ||
                                    attrs[pos] == '\r' || attrs[pos] == '\n'))
        ++pos;
      if (pos < attrs.size()) {
        if (attrs[pos] != ',') throw DotSyntaxError(line, "expected ',' between attributes");
        ++pos;
      }

      if (!seen_keys.insert(key).second)
        throw DotSyntaxError(line, "duplicate attribute '" + key + "'");
      if (key == "shape") {
        if (value != "record")
          throw DotSyntaxError(line, "shape must be record, got '" + value + "'");
      } else if (key == "filename") {
        // A literal newline inside the filename is a typesetting artifact;
        // normalize it to a path separator.
        std::string norm;
        for (char c : value) norm += (c == '\n') ? '/' : c;
        node.filename = norm;
      } else if (key == "startline") {
        node.startline = detail::parse_int(value, line, "startline");
      } else if (key == "headline") {
        node.headline = detail::parse_int(value, line, "headline");
      } else if (key == "bbendline") {
        node.bbendline = detail::parse_int(value, line, "bbendline");
      } else if (key == "startcolumn") {
        node.startcolumn = detail::parse_int(value, line, "startcolumn");
      } else if (key == "label") {
        if (value.size() < 2 || value.front() != '{' || value.back() != '}')
          throw DotSyntaxError(line, "label must be '{...}'");
        node.label = value.substr(1, value.size() - 2);
      } else {
        throw DotSyntaxError(line, "unknown attribute '" + key + "'");
      }
    }
    for (const char* required : {"shape", "filename", "startline", "headline", "bbendline",
                                 "startcolumn", "label"})
      if (!seen_keys.count(required))
        throw DotSyntaxError(line, std::string("missing attribute '") + required + "'");

    GraphNode& slot = ensure_node(id);
    if (slot.declared) throw DotSyntaxError(line, "duplicate node id '" + id + "'");
    node.declared = true;
    slot = node;
  }

  // Classify: block labels look like `name#bbK`.
  bool cfg = false;
  for (const auto& n : g.nodes)
    if (n.declared && n.label.find("#bb") != std::string::npos) cfg = true;
  if (cfg) {
    g.kind = ProgramGraph::Kind::ControlFlowGraph;
    for (const auto& n : g.nodes) {
      if (!n.declared) continue;
      g.entry = n.id;
      g.function = n.label.substr(0, n.label.find("#bb"));
      break;
    }
  }
  return g;
}

}  // namespace difuzz::graphs
