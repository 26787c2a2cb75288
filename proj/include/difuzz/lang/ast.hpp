#pragma once

#include <memory>
#include <string>
#include <vector>

namespace difuzz::lang {

struct SourcePos {
  std::string file;
  int line = 1;
  int col = 1;

  friend bool operator==(const SourcePos& a, const SourcePos& b) {
    return a.file == b.file && a.line == b.line && a.col == b.col;
  }
};

enum class BinOp { Add, Sub, Mul, Div, Mod, Eq, Ne, Lt, Le, Gt, Ge, And, Or };
enum class UnOp { Neg, Not };

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

struct Expr {
  enum class Kind { IntLit, Var, Binary, Unary, Input, InputLen };
  Kind kind{};
  SourcePos pos;
  long long int_val = 0;  // IntLit
  std::string name;       // Var
  BinOp bin{};
  UnOp un{};
  ExprPtr lhs;  // Binary lhs, Unary operand, Input index
  ExprPtr rhs;  // Binary rhs
};

struct Stmt;
using StmtPtr = std::unique_ptr<Stmt>;

struct Block {
  std::vector<StmtPtr> stmts;
  int open_line = 0;   // line of '{'
  int close_line = 0;  // line of '}'
};

struct Stmt {
  enum class Kind { Assign, Call, If, While, Return, Panic, Print, Break, Continue };
  Kind kind{};
  SourcePos pos;
  int stmt_id = 0;  // unique within one Ast, assigned in parse order

  std::string name;             // Assign target / Call callee
  ExprPtr expr;                 // Assign rhs, If/While cond, Return/Print value
  std::vector<ExprPtr> args;    // Call arguments
  std::string str;              // Panic message / Print string literal
  bool print_is_str = false;
  bool has_value = false;       // Return with value
  Block body;                   // If then / While body
  Block else_body;
  bool has_else = false;
  int end_line = 0;  // If/While: closing brace line; simple stmts: pos.line
};

struct Function {
  std::string name;
  std::vector<std::string> params;
  Block body;
  SourcePos pos;        // `func` keyword
  int header_line = 0;  // line the signature ends on (single-line signatures)
  int end_line = 0;     // closing brace line
  // Duplicate-position instance bookkeeping: a `func[k]` declaration expands
  // into k Function entries sharing one source span. `instances` is k on each
  // copy, `occurrence` the copy index.
  int instances = 1;
  int occurrence = 0;
};

struct Ast {
  std::string file;
  std::vector<Function> functions;
  int next_stmt_id = 1;
};

// Names reserved for the instrumentation runtime.
inline constexpr const char* kGuardBuiltin = "SancovGuard";
inline constexpr const char* kEtsBuiltin = "InstrumentETS";

// -- deep copy ---------------------------------------------------------------

inline ExprPtr clone(const ExprPtr& e);

inline ExprPtr clone_expr(const Expr& e) {
  auto out = std::make_unique<Expr>();
  out->kind = e.kind;
  out->pos = e.pos;
  out->int_val = e.int_val;
  out->name = e.name;
  out->bin = e.bin;
  out->un = e.un;
  out->lhs = clone(e.lhs);
  out->rhs = clone(e.rhs);
  return out;
}

inline ExprPtr clone(const ExprPtr& e) { return e ? clone_expr(*e) : nullptr; }

inline StmtPtr clone_stmt(const Stmt& s);

inline Block clone_block(const Block& b) {
  Block out;
  out.open_line = b.open_line;
  out.close_line = b.close_line;
  out.stmts.reserve(b.stmts.size());
  for (const auto& s : b.stmts) out.stmts.push_back(clone_stmt(*s));
  return out;
}

inline StmtPtr clone_stmt(const Stmt& s) {
  auto out = std::make_unique<Stmt>();
  out->kind = s.kind;
  out->pos = s.pos;
  out->stmt_id = s.stmt_id;
  out->name = s.name;
  out->expr = clone(s.expr);
  for (const auto& a : s.args) out->args.push_back(clone(a));
  out->str = s.str;
  out->print_is_str = s.print_is_str;
  out->has_value = s.has_value;
  out->body = clone_block(s.body);
  out->else_body = clone_block(s.else_body);
  out->has_else = s.has_else;
  out->end_line = s.end_line;
  return out;
}

inline Ast clone_ast(const Ast& a) {
  Ast out;
  out.file = a.file;
  out.next_stmt_id = a.next_stmt_id;
  out.functions.reserve(a.functions.size());
  for (const auto& f : a.functions) {
    Function g;
    g.name = f.name;
    g.params = f.params;
    g.body = clone_block(f.body);
    g.pos = f.pos;
    g.header_line = f.header_line;
    g.end_line = f.end_line;
    g.instances = f.instances;
    g.occurrence = f.occurrence;
    out.functions.push_back(std::move(g));
  }
  return out;
}

// -- structural equality (ignores positions and stmt ids) --------------------

inline bool struct_eq(const Expr* a, const Expr* b) {
  if (!a || !b) return a == b;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case Expr::Kind::IntLit: return a->int_val == b->int_val;
    case Expr::Kind::Var: return a->name == b->name;
    case Expr::Kind::Binary:
      return a->bin == b->bin && struct_eq(a->lhs.get(), b->lhs.get()) &&
             struct_eq(a->rhs.get(), b->rhs.get());
    case Expr::Kind::Unary:
      return a->un == b->un && struct_eq(a->lhs.get(), b->lhs.get());
    case Expr::Kind::Input: return struct_eq(a->lhs.get(), b->lhs.get());
    case Expr::Kind::InputLen: return true;
  }
  return false;
}

inline bool struct_eq(const Stmt& a, const Stmt& b);

inline bool struct_eq(const Block& a, const Block& b) {
  if (a.stmts.size() != b.stmts.size()) return false;
  for (std::size_t i = 0; i < a.stmts.size(); ++i)
    if (!struct_eq(*a.stmts[i], *b.stmts[i])) return false;
  return true;
}

inline bool struct_eq(const Stmt& a, const Stmt& b) {
  if (a.kind != b.kind) return false;
  if (a.name != b.name || a.str != b.str) return false;
  if (a.print_is_str != b.print_is_str || a.has_value != b.has_value) return false;
  if (a.has_else != b.has_else) return false;
  if (!struct_eq(a.expr.get(), b.expr.get())) return false;
  if (a.args.size() != b.args.size()) return false;
  for (std::size_t i = 0; i < a.args.size(); ++i)
    if (!struct_eq(a.args[i].get(), b.args[i].get())) return false;
  return struct_eq(a.body, b.body) && struct_eq(a.else_body, b.else_body);
}

inline bool struct_eq(const Ast& a, const Ast& b) {
  if (a.functions.size() != b.functions.size()) return false;
  for (std::size_t i = 0; i < a.functions.size(); ++i) {
    const Function& f = a.functions[i];
    const Function& g = b.functions[i];
    if (f.name != g.name || f.params != g.params || f.instances != g.instances ||
        f.occurrence != g.occurrence || !struct_eq(f.body, g.body))
      return false;
  }
  return true;
}

}  // namespace difuzz::lang
