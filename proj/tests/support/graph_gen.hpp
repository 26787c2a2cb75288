#pragma once

// Random program-graph generator confined to the emitter's image, for
// round-trip property tests.

#include <cstdio>
#include <string>
#include <vector>

#include "difuzz/graph/graph.hpp"
#include "program_gen.hpp"

namespace testgen {

inline difuzz::graphs::ProgramGraph random_graph(Rng& rng, bool cfg_kind) {
  using difuzz::graphs::GraphNode;
  using difuzz::graphs::ProgramGraph;
  ProgramGraph g;
  g.kind = cfg_kind ? ProgramGraph::Kind::ControlFlowGraph : ProgramGraph::Kind::CallGraph;
  std::size_t n = 1 + below(rng, 12);
  std::string fn = "fn" + std::to_string(below(rng, 1000));
  if (cfg_kind) g.function = fn;
  for (std::size_t i = 0; i < n; ++i) {
    GraphNode node;
    char buf[32];
    std::snprintf(buf, sizeof buf, "Node0x%llx",
                  static_cast<unsigned long long>(0x1000 + i * 16 + below(rng, 16)));
    node.id = buf;
    node.filename = "/p" + std::to_string(below(rng, 5)) + "/src/f" +
                    std::to_string(below(rng, 20)) + (cfg_kind ? ".go" : ".rs");
    node.startline = static_cast<int>(1 + below(rng, 500));
    node.headline = node.startline + static_cast<int>(below(rng, 10));
    node.bbendline = node.startline + static_cast<int>(below(rng, 10));
    node.startcolumn = static_cast<int>(below(rng, 80));
    node.label = cfg_kind ? fn + "#bb" + std::to_string(i)
                          : "sym_" + std::to_string(below(rng, 10000)) + "_" +
                                std::to_string(i);
    g.nodes.push_back(std::move(node));
  }
  if (cfg_kind) g.entry = g.nodes.front().id;
  std::size_t edges = below(rng, 2 * n + 1);
  for (std::size_t e = 0; e < edges; ++e) {
    const auto& from = g.nodes[below(rng, n)];
    const auto& to = g.nodes[below(rng, n)];
    g.edges.push_back({from.id, to.id, !cfg_kind && below(rng, 4) == 0});
  }
  return g;
}

}  // namespace testgen
