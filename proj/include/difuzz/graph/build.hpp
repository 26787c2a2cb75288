#pragma once

#include <cstdio>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "difuzz/graph/graph.hpp"
#include "difuzz/lang/ast.hpp"

namespace difuzz::graphs {

struct UnknownFunction : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Where an instrumentation call for a block goes, relative to the AST.
struct InsertAnchor {
  const lang::Block* list = nullptr;  // statement list to insert into
  std::size_t index = 0;              // insert before this position
  int line = 0;                       // source line the anchor corresponds to
  int col = 1;
};

// One basic block of the source-level decomposition. Only simple statements
// live in `stmts`; an if/while whose condition ends the block is recorded as
// the terminator.
struct BasicBlock {
  int index = 0;
  std::vector<const lang::Stmt*> stmts;
  const lang::Stmt* terminator = nullptr;
  std::vector<int> succs;
  int start_line = 0;
  int end_line = 0;
  InsertAnchor anchor;
  std::vector<std::string> callees;  // non-builtin calls made in this block
  bool has_statements() const { return !stmts.empty(); }
};

struct FunctionCfg {
  std::string function;
  int occurrence = 0;
  std::string file;
  int func_startline = 0;
  int func_headline = 0;
  std::vector<BasicBlock> blocks;
};

namespace detail {

class CfgBuilder {
 public:
  explicit CfgBuilder(const lang::Function& f, const std::string& file) {
    cfg_.function = f.name;
    cfg_.occurrence = f.occurrence;
    cfg_.file = file;
    cfg_.func_startline = f.pos.line;
    cfg_.func_headline = f.header_line;
    has_control_ = contains_control(f.body);
    int entry = new_block();
    cfg_.blocks[entry].start_line = f.pos.line;
    cfg_.blocks[entry].anchor = front_anchor(f.body, f.pos.line);
    int last = process(f.body, entry);
    if (has_control_) {
      int exit = new_block();
      cfg_.blocks[exit].start_line = f.end_line;
      cfg_.blocks[exit].end_line = f.end_line;
      cfg_.blocks[exit].anchor = {&f.body, f.body.stmts.size(), f.end_line, 1};
      edge(last, exit);
    }
    finish_lines(f);
  }

  FunctionCfg take() { return std::move(cfg_); }

 private:
  static bool contains_control(const lang::Block& b) {
    for (const auto& s : b.stmts) {
      if (s->kind == lang::Stmt::Kind::If || s->kind == lang::Stmt::Kind::While) return true;
    }
    return false;
  }

  int new_block() {
    BasicBlock b;
    b.index = static_cast<int>(cfg_.blocks.size());
    cfg_.blocks.push_back(std::move(b));
    return cfg_.blocks.back().index;
  }

  void edge(int from, int to) { cfg_.blocks[from].succs.push_back(to); }

  static InsertAnchor front_anchor(const lang::Block& b, int fallback_line) {
    InsertAnchor a;
    a.list = &b;
    a.index = 0;
    if (!b.stmts.empty()) {
      a.line = b.stmts.front()->pos.line;
      a.col = b.stmts.front()->pos.col;
    } else {
      a.line = fallback_line;
    }
    return a;
  }

  // Processes a statement list into the CFG starting at `cur`; returns the
  // block control falls out of.
  int process(const lang::Block& list, int cur) {
    for (std::size_t i = 0; i < list.stmts.size(); ++i) {
      const lang::Stmt& s = *list.stmts[i];
      switch (s.kind) {
        case lang::Stmt::Kind::If: {
          cfg_.blocks[cur].terminator = &s;
          int then_blk = new_block();
          cfg_.blocks[then_blk].anchor = front_anchor(s.body, s.body.open_line);
          edge(cur, then_blk);
          int then_end = process(s.body, then_blk);
          int else_blk = -1, else_end = -1;
          if (s.has_else) {
            else_blk = new_block();
            cfg_.blocks[else_blk].anchor = front_anchor(s.else_body, s.else_body.open_line);
            edge(cur, else_blk);
            else_end = process(s.else_body, else_blk);
          }
          int join = new_block();
          cfg_.blocks[join].anchor = {&list, i + 1, s.end_line, 1};
          if (!s.has_else) edge(cur, join);
          edge(then_end, join);
          if (else_end >= 0) edge(else_end, join);
          cur = join;
          break;
        }
        case lang::Stmt::Kind::While: {
          int header = new_block();
          cfg_.blocks[header].terminator = &s;
          cfg_.blocks[header].anchor = {&list, i, s.pos.line, s.pos.col};
          edge(cur, header);
          int body = new_block();
          cfg_.blocks[body].anchor = front_anchor(s.body, s.body.open_line);
          edge(header, body);
          int body_end = process(s.body, body);
          edge(body_end, header);  // back edge
          int after = new_block();
          cfg_.blocks[after].anchor = {&list, i + 1, s.end_line, 1};
          edge(header, after);
          cur = after;
          break;
        }
        default: {
          BasicBlock& blk = cfg_.blocks[cur];
          if (blk.stmts.empty() && !blk.terminator && blk.anchor.list == nullptr)
            blk.anchor = {&list, i, s.pos.line, s.pos.col};
          blk.stmts.push_back(&s);
          if (s.kind == lang::Stmt::Kind::Call && s.name != lang::kGuardBuiltin &&
              s.name != lang::kEtsBuiltin)
            blk.callees.push_back(s.name);
          break;
        }
      }
    }
    return cur;
  }

  void finish_lines(const lang::Function& f) {
    for (BasicBlock& b : cfg_.blocks) {
      if (b.index == 0) {
        b.start_line = f.pos.line;
      } else if (!b.stmts.empty()) {
        b.start_line = b.stmts.front()->pos.line;
      } else if (b.terminator) {
        b.start_line = b.terminator->pos.line;
      } else if (b.start_line == 0) {
        b.start_line = b.anchor.line;
      }
      if (b.terminator) {
        b.end_line = b.terminator->pos.line;
      } else if (!b.stmts.empty()) {
        b.end_line = b.stmts.back()->pos.line;
      } else if (b.end_line == 0) {
        b.end_line = b.anchor.line;
      }
    }
  }

  FunctionCfg cfg_;
  bool has_control_ = false;
};

inline std::string node_id(int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "Node0x%x", static_cast<unsigned>(index) + 1);
  return buf;
}

}  // namespace detail

inline FunctionCfg build_function_cfg(const lang::Ast& ast, const std::string& function,
                                      int occurrence) {
  for (const auto& f : ast.functions) {
    if (f.name == function && f.occurrence == occurrence)
      return detail::CfgBuilder(f, ast.file).take();
  }
  throw UnknownFunction("no function '" + function + "' occurrence " +
                        std::to_string(occurrence));
}

inline std::vector<FunctionCfg> build_all_cfgs(const lang::Ast& ast) {
  std::vector<FunctionCfg> out;
  out.reserve(ast.functions.size());
  for (const auto& f : ast.functions)
    out.push_back(detail::CfgBuilder(f, ast.file).take());
  return out;
}

inline ProgramGraph to_program_graph(const FunctionCfg& cfg) {
  ProgramGraph g;
  g.kind = ProgramGraph::Kind::ControlFlowGraph;
  g.function = cfg.function;
  for (const auto& b : cfg.blocks) {
    GraphNode n;
    n.id = detail::node_id(b.index);
    n.filename = cfg.file;
    n.startline = b.start_line;
    n.headline = b.index == 0 ? cfg.func_headline : b.start_line;
    n.bbendline = b.end_line;
    n.startcolumn = b.index == 0 ? 1
                    : !b.stmts.empty() ? b.stmts.front()->pos.col
                    : b.terminator     ? b.terminator->pos.col
                                       : b.anchor.col;
    n.label = cfg.function + "#bb" + std::to_string(b.index);
    g.nodes.push_back(std::move(n));
  }
  for (const auto& b : cfg.blocks)
    for (int succ : b.succs)
      g.edges.push_back({detail::node_id(b.index), detail::node_id(succ), false});
  g.entry = detail::node_id(0);
  return g;
}

inline ProgramGraph build_cfg(const lang::Ast& ast, const std::string& function,
                              int occurrence = 0) {
  return to_program_graph(build_function_cfg(ast, function, occurrence));
}

inline void collect_callees(const lang::Block& b, std::set<std::string>& out);

inline ProgramGraph build_call_graph(const lang::Ast& ast) {
  ProgramGraph g;
  g.kind = ProgramGraph::Kind::CallGraph;
  std::map<std::string, std::vector<std::size_t>> decls_by_name;
  for (std::size_t i = 0; i < ast.functions.size(); ++i) {
    const lang::Function& f = ast.functions[i];
    FunctionCfg cfg = detail::CfgBuilder(f, ast.file).take();
    GraphNode n;
    n.id = detail::node_id(static_cast<int>(i));
    n.filename = ast.file;
    n.startline = f.pos.line;
    n.headline = f.header_line;
    n.bbendline = cfg.blocks[0].end_line;
    n.startcolumn = f.pos.col;
    n.label = f.name;
    g.nodes.push_back(std::move(n));
    decls_by_name[f.name].push_back(i);
  }
  // One edge per (caller, callee declaration); a call to a duplicated name
  // targets every instance.
  for (std::size_t i = 0; i < ast.functions.size(); ++i) {
    std::set<std::string> callees;
    collect_callees(ast.functions[i].body, callees);
    for (const auto& name : callees) {
      auto it = decls_by_name.find(name);
      if (it == decls_by_name.end()) continue;
      for (std::size_t j : it->second)
        g.edges.push_back({detail::node_id(static_cast<int>(i)),
                           detail::node_id(static_cast<int>(j)), false});
    }
  }
  return g;
}

inline void collect_callees(const lang::Block& b, std::set<std::string>& out) {
  for (const auto& s : b.stmts) {
    if (s->kind == lang::Stmt::Kind::Call && s->name != lang::kGuardBuiltin &&
        s->name != lang::kEtsBuiltin)
      out.insert(s->name);
    collect_callees(s->body, out);
    collect_callees(s->else_body, out);
  }
}

}  // namespace difuzz::graphs
