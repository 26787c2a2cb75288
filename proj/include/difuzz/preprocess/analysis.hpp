#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "difuzz/graph/build.hpp"
#include "difuzz/graph/graph.hpp"
#include "difuzz/lang/ast.hpp"
#include "difuzz/preprocess/ets.hpp"
#include "difuzz/util/rational.hpp"

namespace difuzz::pre {

struct TargetNotFound : std::runtime_error {
  explicit TargetNotFound(const TargetPoint& tp)
      : std::runtime_error("target " + tp.id + " at " + tp.file + ":" +
                           std::to_string(tp.line) + " matches no basic block") {}
};

// Call-transition constant of the block distance formula.
inline constexpr std::int64_t kCallTransitionCost = 10;

// Graph-level view of one program: the call graph, all per-function CFGs,
// and the block-level call sites the DOT schema cannot carry.
struct ProgramModel {
  struct Block {
    int index = 0;
    int start_line = 0;
    int end_line = 0;
    std::vector<int> succs;
    std::vector<std::string> callees;
  };
  struct Cfg {
    std::string file;
    std::string function;
    int occurrence = 0;
    std::vector<Block> blocks;
  };

  graphs::ProgramGraph cg;
  std::vector<Cfg> cfgs;
  // CG node id -> index into the declaration order; label gives the name.
  std::map<std::string, int> cg_decl_index;
  std::map<std::string, std::pair<std::string, int>> cg_fn;  // node id -> (name, occurrence)

  const Cfg* find_cfg(const std::string& function, int occurrence) const {
    for (const auto& c : cfgs)
      if (c.function == function && c.occurrence == occurrence) return &c;
    return nullptr;
  }

  std::vector<std::string> cg_nodes_of(const std::string& function) const {
    std::vector<std::string> out;
    for (const auto& [id, fn] : cg_fn)
      if (fn.first == function) out.push_back(id);
    return out;
  }
};

inline ProgramModel build_model(const std::vector<lang::Ast>& files) {
  ProgramModel m;
  m.cg.kind = graphs::ProgramGraph::Kind::CallGraph;
  struct Decl {
    const lang::Ast* ast;
    const lang::Function* fn;
  };
  std::vector<Decl> decls;
  for (const auto& ast : files)
    for (const auto& f : ast.functions) decls.push_back({&ast, &f});

  std::map<std::string, std::vector<int>> by_name;
  for (std::size_t i = 0; i < decls.size(); ++i) {
    const lang::Function& f = *decls[i].fn;
    graphs::FunctionCfg cfg = graphs::detail::CfgBuilder(f, decls[i].ast->file).take();

    graphs::GraphNode n;
    n.id = graphs::detail::node_id(static_cast<int>(i));
    n.filename = decls[i].ast->file;
    n.startline = f.pos.line;
    n.headline = f.header_line;
    n.bbendline = cfg.blocks[0].end_line;
    n.startcolumn = f.pos.col;
    n.label = f.name;
    m.cg_decl_index[n.id] = static_cast<int>(i);
    m.cg_fn[n.id] = {f.name, f.occurrence};
    m.cg.nodes.push_back(std::move(n));
    by_name[f.name].push_back(static_cast<int>(i));

    ProgramModel::Cfg mc;
    mc.file = cfg.file;
    mc.function = cfg.function;
    mc.occurrence = cfg.occurrence;
    for (const auto& b : cfg.blocks) {
      ProgramModel::Block mb;
      mb.index = b.index;
      mb.start_line = b.start_line;
      mb.end_line = b.end_line;
      mb.succs = b.succs;
      mb.callees = b.callees;
      mc.blocks.push_back(std::move(mb));
    }
    m.cfgs.push_back(std::move(mc));
  }

  for (std::size_t i = 0; i < decls.size(); ++i) {
    std::set<std::string> callees;
    graphs::collect_callees(decls[i].fn->body, callees);
    for (const auto& name : callees) {
      auto it = by_name.find(name);
      if (it == by_name.end()) continue;
      for (int j : it->second)
        m.cg.edges.push_back({graphs::detail::node_id(static_cast<int>(i)),
                              graphs::detail::node_id(j), false});
    }
  }
  return m;
}

struct BlockRef {
  std::string function;
  int occurrence = 0;
  int cfg_block = 0;

  friend bool operator<(const BlockRef& a, const BlockRef& b) {
    if (a.function != b.function) return a.function < b.function;
    if (a.occurrence != b.occurrence) return a.occurrence < b.occurrence;
    return a.cfg_block < b.cfg_block;
  }
  friend bool operator==(const BlockRef& a, const BlockRef& b) {
    return a.function == b.function && a.occurrence == b.occurrence &&
           a.cfg_block == b.cfg_block;
  }
};

// Every CFG block whose line range spans the target, across all
// duplicate-position instances.
inline std::set<BlockRef> locate_target_blocks(const ProgramModel& m, const TargetPoint& tp) {
  std::set<BlockRef> out;
  for (const auto& cfg : m.cfgs) {
    if (cfg.file != tp.file) continue;
    for (const auto& b : cfg.blocks)
      if (b.start_line <= tp.line && tp.line <= b.end_line)
        out.insert({cfg.function, cfg.occurrence, b.index});
  }
  if (out.empty()) throw TargetNotFound(tp);
  return out;
}

// Harmonic mean of BFS hop counts from `from` to each reachable target
// function node; 0 when `from` is itself a target; infinity when none
// reachable.
inline Rational function_distance(const graphs::ProgramGraph& cg, const std::string& from,
                                  const std::set<std::string>& target_nodes) {
  if (target_nodes.count(from)) return Rational(0);
  std::map<std::string, std::vector<std::string>> adj;
  for (const auto& e : cg.edges) adj[e.from].push_back(e.to);
  std::map<std::string, int> hops;
  std::deque<std::string> queue{from};
  hops[from] = 0;
  while (!queue.empty()) {
    std::string cur = queue.front();
    queue.pop_front();
    for (const auto& nxt : adj[cur]) {
      if (hops.count(nxt)) continue;
      hops[nxt] = hops[cur] + 1;
      queue.push_back(nxt);
    }
  }
  Rational inv_sum(0);
  std::int64_t n = 0;
  for (const auto& t : target_nodes) {
    auto it = hops.find(t);
    if (it == hops.end()) continue;
    inv_sum = inv_sum + Rational(1, it->second);
    ++n;
  }
  if (n == 0) return Rational::infinity();
  return Rational(n) / inv_sum;
}

namespace detail {

// Per-CFG anchor bases: 0 for target blocks, C * min function_distance over
// callees for call blocks, infinity otherwise.
inline std::vector<Rational> block_bases(const ProgramModel& m, const ProgramModel::Cfg& cfg,
                                         const std::set<BlockRef>& target_blocks,
                                         const std::map<std::string, Rational>& fdist) {
  std::vector<Rational> base(cfg.blocks.size(), Rational::infinity());
  for (const auto& b : cfg.blocks) {
    if (target_blocks.count({cfg.function, cfg.occurrence, b.index})) {
      base[b.index] = Rational(0);
      continue;
    }
    Rational best = Rational::infinity();
    for (const auto& callee : b.callees) {
      for (const auto& node : m.cg_nodes_of(callee)) {
        auto it = fdist.find(node);
        if (it != fdist.end() && !it->second.is_infinite() && it->second < best)
          best = it->second;
      }
    }
    if (!best.is_infinite()) base[b.index] = Rational(kCallTransitionCost) * best;
  }
  return base;
}

// d(b) = min over anchors a of (hops(b -> a) + base(a)); one reverse BFS per
// anchor keeps this simple, graphs are tiny.
inline std::vector<Rational> block_distances(const ProgramModel::Cfg& cfg,
                                             const std::vector<Rational>& base) {
  std::size_t n = cfg.blocks.size();
  std::vector<std::vector<int>> pred(n);
  for (const auto& b : cfg.blocks)
    for (int s : b.succs) pred[static_cast<std::size_t>(s)].push_back(b.index);
  std::vector<Rational> dist(n, Rational::infinity());
  for (std::size_t a = 0; a < n; ++a) {
    if (base[a].is_infinite()) continue;
    std::vector<int> hops(n, -1);
    std::deque<int> queue{static_cast<int>(a)};
    hops[a] = 0;
    while (!queue.empty()) {
      int cur = queue.front();
      queue.pop_front();
      for (int p : pred[static_cast<std::size_t>(cur)]) {
        if (hops[static_cast<std::size_t>(p)] >= 0) continue;
        hops[static_cast<std::size_t>(p)] = hops[static_cast<std::size_t>(cur)] + 1;
        queue.push_back(p);
      }
    }
    for (std::size_t b = 0; b < n; ++b) {
      if (hops[b] < 0) continue;
      Rational d = Rational(hops[b]) + base[a];
      if (d < dist[b]) dist[b] = d;
    }
  }
  return dist;
}

struct PerTarget {
  std::set<BlockRef> target_blocks;
  std::set<std::string> target_fn_nodes;
  std::map<std::string, Rational> fdist;  // CG node -> distance
};

inline PerTarget analyze_target(const ProgramModel& m, const TargetPoint& tp) {
  PerTarget out;
  out.target_blocks = locate_target_blocks(m, tp);
  for (const auto& tb : out.target_blocks)
    for (const auto& [id, fn] : m.cg_fn)
      if (fn.first == tb.function && fn.second == tb.occurrence)
        out.target_fn_nodes.insert(id);
  for (const auto& node : m.cg.nodes)
    out.fdist[node.id] = function_distance(m.cg, node.id, out.target_fn_nodes);
  return out;
}

}  // namespace detail

// Block distance against a single target point.
inline Rational block_distance(const ProgramModel& m, const TargetPoint& tp,
                               const BlockRef& block) {
  detail::PerTarget t = detail::analyze_target(m, tp);
  const ProgramModel::Cfg* cfg = m.find_cfg(block.function, block.occurrence);
  if (!cfg) throw graphs::UnknownFunction("no CFG for " + block.function);
  auto base = detail::block_bases(m, *cfg, t.target_blocks, t.fdist);
  auto dist = detail::block_distances(*cfg, base);
  return dist[static_cast<std::size_t>(block.cfg_block)];
}

// Full static analysis product: every block with a finite distance to any
// target, weighted 1/(1+d), with deterministic id assignment.
inline EnhancedTargetSequence compute_ets(const ProgramModel& m,
                                          const std::vector<TargetPoint>& targets) {
  EnhancedTargetSequence ets;
  ets.targets = targets;

  std::vector<detail::PerTarget> per_target;
  per_target.reserve(targets.size());
  for (const auto& tp : targets) per_target.push_back(detail::analyze_target(m, tp));

  struct Entry {
    std::string file;
    BlockRef ref;
    int start_line, end_line;
    Rational dist;
  };
  std::vector<Entry> entries;
  Rational max_d(0);
  for (const auto& cfg : m.cfgs) {
    std::vector<Rational> best(cfg.blocks.size(), Rational::infinity());
    for (const auto& t : per_target) {
      auto base = detail::block_bases(m, cfg, t.target_blocks, t.fdist);
      auto dist = detail::block_distances(cfg, base);
      for (std::size_t i = 0; i < dist.size(); ++i)
        if (dist[i] < best[i]) best[i] = dist[i];
    }
    for (const auto& b : cfg.blocks) {
      Rational d = best[static_cast<std::size_t>(b.index)];
      if (d.is_infinite()) continue;
      entries.push_back({cfg.file,
                         {cfg.function, cfg.occurrence, b.index},
                         b.start_line,
                         b.end_line,
                         d});
      if (d > max_d) max_d = d;
    }
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.file != b.file) return a.file < b.file;
    return a.ref < b.ref;
  });
  int next_id = 1;
  for (const auto& e : entries) {
    EtsBlock blk;
    blk.block_id = next_id++;
    blk.file = e.file;
    blk.function = e.ref.function;
    blk.occurrence = e.ref.occurrence;
    blk.cfg_block = e.ref.cfg_block;
    blk.start_line = e.start_line;
    blk.end_line = e.end_line;
    blk.weight = (Rational(1) / (Rational(1) + e.dist)).to_double();
    ets.blocks.push_back(std::move(blk));
  }
  ets.max_block_distance = static_cast<int>(std::ceil(max_d.to_double()));
  return ets;
}

}  // namespace difuzz::pre
