#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "difuzz/graph/build.hpp"
#include "difuzz/lang/ast.hpp"
#include "difuzz/lang/emit.hpp"
#include "difuzz/lang/parse.hpp"
#include "difuzz/preprocess/ets.hpp"
#include "difuzz/preprocess/ets_io.hpp"
#include "json.hpp"

namespace difuzz::inst {

struct InstrumentationPlan {
  struct EtsInsertion {
    std::string file;
    std::string function;
    int occurrence = 0;
    int cfg_block = 0;
    int block_id = 0;
  };
  struct CoverageInsertion {
    std::string file;
    std::string function;
    int occurrence = 0;
    int cfg_block = 0;
    int guard_id = 0;
  };
  std::vector<EtsInsertion> ets_insertions;
  std::vector<CoverageInsertion> coverage_insertions;
  std::vector<int> unplaceable;  // ETS block ids with no statement to anchor on

  void merge(InstrumentationPlan&& other) {
    for (auto& e : other.ets_insertions) ets_insertions.push_back(std::move(e));
    for (auto& c : other.coverage_insertions) coverage_insertions.push_back(std::move(c));
    for (int u : other.unplaceable) unplaceable.push_back(u);
  }
};

struct BlockNotMatched : std::runtime_error {
  explicit BlockNotMatched(std::vector<int> ids)
      : std::runtime_error(describe(ids)), block_ids(std::move(ids)) {}
  std::vector<int> block_ids;

 private:
  static std::string describe(const std::vector<int>& ids) {
    std::string msg = "ETS blocks match no AST block:";
    for (int id : ids) msg += " " + std::to_string(id);
    return msg;
  }
};

struct AlreadyInstrumented : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline bool block_has_instrumentation(const lang::Block& b) {
  for (const auto& s : b.stmts) {
    if (s->kind == lang::Stmt::Kind::Call &&
        (s->name == lang::kGuardBuiltin || s->name == lang::kEtsBuiltin))
      return true;
    if (block_has_instrumentation(s->body) || block_has_instrumentation(s->else_body))
      return true;
  }
  return false;
}

inline bool is_instrumented(const lang::Ast& ast) {
  for (const auto& f : ast.functions)
    if (block_has_instrumentation(f.body)) return true;
  return false;
}

inline lang::StmtPtr make_probe_call(lang::Ast& ast, const char* name, int id, int line) {
  auto s = std::make_unique<lang::Stmt>();
  s->kind = lang::Stmt::Kind::Call;
  s->name = name;
  s->stmt_id = ast.next_stmt_id++;
  s->pos = lang::SourcePos{ast.file, line, 1};
  s->end_line = line;
  auto arg = std::make_unique<lang::Expr>();
  arg->kind = lang::Expr::Kind::IntLit;
  arg->int_val = id;
  arg->pos = s->pos;
  s->args.push_back(std::move(arg));
  return s;
}

struct Insertion {
  const lang::Block* list;
  std::size_t index;
  int block_index;  // tiebreak so stacked probes keep block order
  lang::StmtPtr stmt;
};

// Same list: larger index first; same index: larger block index first, so the
// final statement order is by ascending block index.
inline void apply_insertions(std::vector<Insertion>& ins) {
  std::stable_sort(ins.begin(), ins.end(), [](const Insertion& a, const Insertion& b) {
    if (a.list != b.list) return a.list < b.list;
    if (a.index != b.index) return a.index > b.index;
    return a.block_index > b.block_index;
  });
  for (auto& i : ins) {
    auto* list = const_cast<lang::Block*>(i.list);
    list->stmts.insert(list->stmts.begin() + static_cast<std::ptrdiff_t>(i.index),
                       std::move(i.stmt));
  }
}

}  // namespace detail

// -- source line correspondence ----------------------------------------------
// Emitting an instrumented AST renumbers physical lines. Walking the emitted
// AST next to its re-parsed text yields an old-line -> new-line map, so the
// ETS metadata can follow the program into its instrumented form.

// One old line can fan out to several new ones (inserted probes share the
// following statement's original line), so range starts take the earliest
// image and range ends the latest.
struct LineMaps {
  std::map<int, int> start;  // old line -> smallest new line
  std::map<int, int> end;    // old line -> largest new line

  void record(int old_line, int new_line) {
    auto [it, inserted] = start.emplace(old_line, new_line);
    if (!inserted && new_line < it->second) it->second = new_line;
    auto [jt, jnew] = end.emplace(old_line, new_line);
    if (!jnew && new_line > jt->second) jt->second = new_line;
  }
};

inline void collect_line_pairs(const lang::Block& a, const lang::Block& b, LineMaps& m);

inline void collect_line_pairs(const lang::Stmt& a, const lang::Stmt& b, LineMaps& m) {
  if (a.kind != b.kind) return;
  m.record(a.pos.line, b.pos.line);
  m.record(a.end_line, b.end_line);
  collect_line_pairs(a.body, b.body, m);
  collect_line_pairs(a.else_body, b.else_body, m);
}

inline void collect_line_pairs(const lang::Block& a, const lang::Block& b, LineMaps& m) {
  if (a.open_line && b.open_line) m.record(a.open_line, b.open_line);
  if (a.close_line && b.close_line) m.record(a.close_line, b.close_line);
  std::size_t n = std::min(a.stmts.size(), b.stmts.size());
  for (std::size_t i = 0; i < n; ++i) collect_line_pairs(*a.stmts[i], *b.stmts[i], m);
}

// Duplicate-position instances share one span, so occurrence 0 carries every
// line of the file.
inline LineMaps line_map(const lang::Ast& a, const lang::Ast& b) {
  LineMaps m;
  std::size_t n = std::min(a.functions.size(), b.functions.size());
  for (std::size_t i = 0; i < n; ++i) {
    const lang::Function& fa = a.functions[i];
    const lang::Function& fb = b.functions[i];
    if (fa.occurrence != 0) continue;
    m.record(fa.pos.line, fb.pos.line);
    m.record(fa.header_line, fb.header_line);
    m.record(fa.end_line, fb.end_line);
    collect_line_pairs(fa.body, fb.body, m);
  }
  return m;
}

namespace detail {

// Unmapped start lines snap forward to the next mapped line, ends backward.
inline int remap_line(const LineMaps& m, int line, bool is_end) {
  const std::map<int, int>& table = is_end ? m.end : m.start;
  auto it = table.find(line);
  if (it != table.end()) return it->second;
  if (is_end) {
    auto lb = table.lower_bound(line);
    if (lb == table.begin()) return line;
    return std::prev(lb)->second;
  }
  auto lb = table.lower_bound(line);
  if (lb == table.end()) return line;
  return lb->second;
}

}  // namespace detail

// Inserts InstrumentETS(block_id) before the first statement of every ETS
// block that lives in this file. Blocks that no longer match the AST are an
// error; statement-less blocks are reported as unplaceable.
inline std::pair<lang::Ast, InstrumentationPlan> instrument_ets(
    const lang::Ast& input, const pre::EnhancedTargetSequence& ets) {
  lang::Ast ast = lang::clone_ast(input);
  InstrumentationPlan plan;
  std::vector<int> unmatched;
  std::vector<detail::Insertion> insertions;

  std::map<std::pair<std::string, int>, graphs::FunctionCfg> cfgs;
  for (const auto& f : ast.functions)
    cfgs.emplace(std::make_pair(f.name, f.occurrence),
                 graphs::detail::CfgBuilder(f, ast.file).take());

  for (const auto& blk : ets.blocks) {
    if (blk.file != ast.file) continue;
    auto it = cfgs.find({blk.function, blk.occurrence});
    if (it == cfgs.end()) {
      unmatched.push_back(blk.block_id);
      continue;
    }
    const graphs::FunctionCfg& cfg = it->second;
    if (blk.cfg_block < 0 || blk.cfg_block >= static_cast<int>(cfg.blocks.size())) {
      unmatched.push_back(blk.block_id);
      continue;
    }
    const graphs::BasicBlock& bb = cfg.blocks[static_cast<std::size_t>(blk.cfg_block)];
    if (bb.start_line != blk.start_line || bb.end_line != blk.end_line) {
      unmatched.push_back(blk.block_id);
      continue;
    }
    if (!bb.has_statements()) {
      // A block whose only content is its terminator (entry or loop header)
      // still has a first statement to precede: the terminator itself.
      // Synthetic blocks with no statement at all stay unplaceable.
      if (bb.terminator != nullptr && bb.anchor.list != nullptr) {
        insertions.push_back({bb.anchor.list, bb.anchor.index, bb.index,
                              detail::make_probe_call(ast, lang::kEtsBuiltin, blk.block_id,
                                                      bb.anchor.line)});
        plan.ets_insertions.push_back(
            {blk.file, blk.function, blk.occurrence, blk.cfg_block, blk.block_id});
      } else {
        plan.unplaceable.push_back(blk.block_id);
      }
      continue;
    }
    const lang::Stmt* first = bb.stmts.front();
    bool placed = false;
    if (bb.anchor.list != nullptr) {
      // Locate the first statement explicitly rather than trusting the anchor
      // index; the block may start mid-list (join blocks).
      const lang::Block* list = bb.anchor.list;
      for (std::size_t i = 0; i < list->stmts.size(); ++i) {
        if (list->stmts[i].get() == first) {
          insertions.push_back({list, i, bb.index,
                                detail::make_probe_call(ast, lang::kEtsBuiltin, blk.block_id,
                                                        first->pos.line)});
          placed = true;
          break;
        }
      }
    }
    if (!placed) {
      unmatched.push_back(blk.block_id);
      continue;
    }
    plan.ets_insertions.push_back(
        {blk.file, blk.function, blk.occurrence, blk.cfg_block, blk.block_id});
  }
  if (!unmatched.empty()) throw BlockNotMatched(std::move(unmatched));
  detail::apply_insertions(insertions);
  return {std::move(ast), std::move(plan)};
}

// Inserts SancovGuard(guard_id) at the head position of every basic block of
// every function. Guard ids start at `first_guard_id` and are assigned in
// declaration order, block index order.
inline std::pair<lang::Ast, InstrumentationPlan> instrument_coverage(
    const lang::Ast& input, int first_guard_id = 1) {
  lang::Ast ast = lang::clone_ast(input);
  InstrumentationPlan plan;
  std::vector<detail::Insertion> insertions;
  int next_guard = first_guard_id;
  for (const auto& f : ast.functions) {
    graphs::FunctionCfg cfg = graphs::detail::CfgBuilder(f, ast.file).take();
    for (const auto& bb : cfg.blocks) {
      int guard = next_guard++;
      insertions.push_back({bb.anchor.list, bb.anchor.index, bb.index,
                            detail::make_probe_call(ast, lang::kGuardBuiltin, guard,
                                                    bb.anchor.line)});
      plan.coverage_insertions.push_back({ast.file, f.name, f.occurrence, bb.index, guard});
    }
  }
  detail::apply_insertions(insertions);
  return {std::move(ast), std::move(plan)};
}

inline int count_blocks(const lang::Ast& ast) {
  int total = 0;
  for (const auto& f : ast.functions)
    total += static_cast<int>(graphs::detail::CfgBuilder(f, ast.file).take().blocks.size());
  return total;
}

// Whole-project instrumentation: ETS first, then coverage, over every .mp
// file of the source directory. Refuses already-instrumented input.
inline InstrumentationPlan instrument_program(const std::string& source_dir,
                                              const pre::EnhancedTargetSequence& ets,
                                              const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::vector<fs::path> sources;
  for (const auto& entry : fs::directory_iterator(source_dir))
    if (entry.path().extension() == ".mp") sources.push_back(entry.path());
  std::sort(sources.begin(), sources.end());
  if (sources.empty())
    throw std::runtime_error("no .mp files in " + source_dir);

  std::vector<lang::Ast> asts;
  for (const auto& p : sources) {
    std::ifstream in(p, std::ios::binary);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    lang::Ast ast = lang::parse(text, p.filename().string());
    if (detail::is_instrumented(ast))
      throw AlreadyInstrumented("source already instrumented: " + p.string());
    asts.push_back(std::move(ast));
  }

  InstrumentationPlan plan;
  std::vector<int> unmatched;
  // ETS blocks naming a file outside the project are drift.
  for (const auto& blk : ets.blocks) {
    bool known = false;
    for (const auto& ast : asts)
      if (ast.file == blk.file) known = true;
    if (!known) unmatched.push_back(blk.block_id);
  }
  if (!unmatched.empty()) throw BlockNotMatched(std::move(unmatched));

  fs::create_directories(out_dir);
  // The ETS metadata follows the program: emitted sources get fresh line
  // numbers, so block ranges and target lines are remapped per file.
  pre::EnhancedTargetSequence remapped = ets;
  int next_guard = 1;
  for (auto& ast : asts) {
    auto [with_ets, ets_plan] = instrument_ets(ast, ets);
    auto [with_cov, cov_plan] = instrument_coverage(with_ets, next_guard);
    next_guard += static_cast<int>(cov_plan.coverage_insertions.size());
    plan.merge(std::move(ets_plan));
    plan.merge(std::move(cov_plan));
    std::string text = lang::emit(with_cov);
    std::ofstream out(fs::path(out_dir) / with_cov.file, std::ios::binary);
    out << text;
    LineMaps lines = line_map(with_cov, lang::parse(text, with_cov.file));
    for (auto& blk : remapped.blocks) {
      if (blk.file != with_cov.file) continue;
      blk.start_line = detail::remap_line(lines, blk.start_line, false);
      blk.end_line = detail::remap_line(lines, blk.end_line, true);
    }
    for (auto& tp : remapped.targets)
      if (tp.file == with_cov.file) tp.line = detail::remap_line(lines, tp.line, false);
  }
  pre::write_ets_toml(remapped, (fs::path(out_dir) / "ets.toml").string());

  nlohmann::json j;
  j["ets_insertions"] = nlohmann::json::array();
  for (const auto& e : plan.ets_insertions)
    j["ets_insertions"].push_back({{"file", e.file},
                                   {"function", e.function},
                                   {"occurrence", e.occurrence},
                                   {"cfg_block", e.cfg_block},
                                   {"block_id", e.block_id}});
  j["coverage_insertions"] = nlohmann::json::array();
  for (const auto& c : plan.coverage_insertions)
    j["coverage_insertions"].push_back({{"file", c.file},
                                        {"function", c.function},
                                        {"occurrence", c.occurrence},
                                        {"cfg_block", c.cfg_block},
                                        {"guard_id", c.guard_id}});
  j["unplaceable"] = plan.unplaceable;
  std::ofstream out(fs::path(out_dir) / "plan.json", std::ios::binary);
  out << j.dump(2) << "\n";
  return plan;
}

}  // namespace difuzz::inst
