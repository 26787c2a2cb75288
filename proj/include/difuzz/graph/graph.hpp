#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace difuzz::graphs {

struct GraphNode {
  std::string id;  // opaque hex token, e.g. Node0x1a
  std::string filename;
  int startline = 0;
  int headline = 0;
  int bbendline = 0;
  int startcolumn = 0;
  std::string label;
  // Edges may reference nodes that carry no record line of their own (the
  // paper's snippets do this); such endpoints become undeclared placeholders.
  bool declared = true;

  friend bool operator==(const GraphNode& a, const GraphNode& b) {
    return a.id == b.id && a.filename == b.filename && a.startline == b.startline &&
           a.headline == b.headline && a.bbendline == b.bbendline &&
           a.startcolumn == b.startcolumn && a.label == b.label && a.declared == b.declared;
  }
  friend bool operator<(const GraphNode& a, const GraphNode& b) { return a.id < b.id; }
};

struct GraphEdge {
  std::string from;
  std::string to;
  bool indirect = false;

  friend bool operator==(const GraphEdge& a, const GraphEdge& b) {
    return a.from == b.from && a.to == b.to && a.indirect == b.indirect;
  }
  friend bool operator<(const GraphEdge& a, const GraphEdge& b) {
    if (a.from != b.from) return a.from < b.from;
    if (a.to != b.to) return a.to < b.to;
    return a.indirect < b.indirect;
  }
};

struct ProgramGraph {
  enum class Kind { CallGraph, ControlFlowGraph };
  Kind kind = Kind::CallGraph;
  std::string function;  // CFG only
  std::vector<GraphNode> nodes;
  std::vector<GraphEdge> edges;
  std::string entry;  // CFG only

  const GraphNode* find(const std::string& id) const {
    for (const auto& n : nodes)
      if (n.id == id) return &n;
    return nullptr;
  }
};

// Field-for-field equality; node and edge order is not significant.
inline bool graph_eq(const ProgramGraph& a, const ProgramGraph& b) {
  if (a.kind != b.kind || a.entry != b.entry) return false;
  std::vector<GraphNode> an = a.nodes, bn = b.nodes;
  std::sort(an.begin(), an.end());
  std::sort(bn.begin(), bn.end());
  if (an != bn) return false;
  std::vector<GraphEdge> ae = a.edges, be = b.edges;
  std::sort(ae.begin(), ae.end());
  std::sort(be.begin(), be.end());
  return ae == be;
}

// BFS reachability over declared edges.
inline std::set<std::string> reachable_from(const ProgramGraph& g, const std::string& start) {
  std::map<std::string, std::vector<std::string>> adj;
  for (const auto& e : g.edges) adj[e.from].push_back(e.to);
  std::set<std::string> seen{start};
  std::vector<std::string> queue{start};
  while (!queue.empty()) {
    std::string cur = queue.back();
    queue.pop_back();
    for (const auto& nxt : adj[cur])
      if (seen.insert(nxt).second) queue.push_back(nxt);
  }
  return seen;
}

}  // namespace difuzz::graphs
