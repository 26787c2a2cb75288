#pragma once

#include <string>

#include "difuzz/lang/ast.hpp"

namespace difuzz::lang {

namespace detail {

inline int prec(const Expr& e) {
  if (e.kind != Expr::Kind::Binary) return 7;
  switch (e.bin) {
    case BinOp::Or: return 1;
    case BinOp::And: return 2;
    case BinOp::Eq: case BinOp::Ne: case BinOp::Lt:
    case BinOp::Le: case BinOp::Gt: case BinOp::Ge: return 3;
    case BinOp::Add: case BinOp::Sub: return 4;
    case BinOp::Mul: case BinOp::Div: case BinOp::Mod: return 5;
  }
  return 7;
}

inline const char* op_text(BinOp op) {
  switch (op) {
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
    case BinOp::Mul: return "*";
    case BinOp::Div: return "/";
    case BinOp::Mod: return "%";
    case BinOp::Eq: return "==";
    case BinOp::Ne: return "!=";
    case BinOp::Lt: return "<";
    case BinOp::Le: return "<=";
    case BinOp::Gt: return ">";
    case BinOp::Ge: return ">=";
    case BinOp::And: return "&&";
    case BinOp::Or: return "||";
  }
  return "?";
}

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      default: out += c;
    }
  }
  return out;
}

inline void emit_expr(const Expr& e, std::string& out) {
  switch (e.kind) {
    case Expr::Kind::IntLit:
      out += std::to_string(e.int_val);
      return;
    case Expr::Kind::Var:
      out += e.name;
      return;
    case Expr::Kind::Input:
      out += "input(";
      emit_expr(*e.lhs, out);
      out += ')';
      return;
    case Expr::Kind::InputLen:
      out += "input_len()";
      return;
    case Expr::Kind::Unary: {
      out += e.un == UnOp::Neg ? '-' : '!';
      bool parens = prec(*e.lhs) < 6;
      if (parens) out += '(';
      emit_expr(*e.lhs, out);
      if (parens) out += ')';
      return;
    }
    case Expr::Kind::Binary: {
      int p = prec(e);
      bool lp = prec(*e.lhs) < p;
      bool rp = prec(*e.rhs) <= p;  // left-associative grammar
      if (lp) out += '(';
      emit_expr(*e.lhs, out);
      if (lp) out += ')';
      out += ' ';
      out += op_text(e.bin);
      out += ' ';
      if (rp) out += '(';
      emit_expr(*e.rhs, out);
      if (rp) out += ')';
      return;
    }
  }
}

inline void emit_block(const Block& b, int indent, std::string& out);

inline void emit_stmt(const Stmt& s, int indent, std::string& out) {
  std::string pad(static_cast<std::size_t>(indent) * 4, ' ');
  out += pad;
  switch (s.kind) {
    case Stmt::Kind::Assign:
      out += s.name;
      out += " = ";
      emit_expr(*s.expr, out);
      out += ";\n";
      return;
    case Stmt::Kind::Call: {
      out += s.name;
      out += '(';
      for (std::size_t i = 0; i < s.args.size(); ++i) {
        if (i) out += ", ";
        emit_expr(*s.args[i], out);
      }
      out += ");\n";
      return;
    }
    case Stmt::Kind::If:
      out += "if ";
      emit_expr(*s.expr, out);
      out += " {\n";
      emit_block(s.body, indent + 1, out);
      out += pad;
      out += '}';
      if (s.has_else) {
        out += " else {\n";
        emit_block(s.else_body, indent + 1, out);
        out += pad;
        out += '}';
      }
      out += '\n';
      return;
    case Stmt::Kind::While:
      out += "while ";
      emit_expr(*s.expr, out);
      out += " {\n";
      emit_block(s.body, indent + 1, out);
      out += pad;
      out += "}\n";
      return;
    case Stmt::Kind::Return:
      out += "return";
      if (s.has_value) {
        out += ' ';
        emit_expr(*s.expr, out);
      }
      out += ";\n";
      return;
    case Stmt::Kind::Panic:
      out += "panic(\"";
      out += escape(s.str);
      out += "\");\n";
      return;
    case Stmt::Kind::Print:
      out += "print(";
      if (s.print_is_str) {
        out += '"';
        out += escape(s.str);
        out += '"';
      } else {
        emit_expr(*s.expr, out);
      }
      out += ");\n";
      return;
    case Stmt::Kind::Break:
      out += "break;\n";
      return;
    case Stmt::Kind::Continue:
      out += "continue;\n";
      return;
  }
}

inline void emit_block(const Block& b, int indent, std::string& out) {
  for (const auto& s : b.stmts) emit_stmt(*s, indent, out);
}

}  // namespace detail

// Canonical pretty printer: emit(parse(emit(ast))) == emit(ast), and
// parse(emit(ast)) is structurally equal to ast.
inline std::string emit(const Ast& ast) {
  std::string out;
  for (std::size_t i = 0; i < ast.functions.size(); ++i) {
    const Function& f = ast.functions[i];
    if (f.occurrence != 0) continue;  // collapse duplicate-position instances
    if (!out.empty()) out += '\n';
    out += "func";
    if (f.instances > 1) {
      out += '[';
      out += std::to_string(f.instances);
      out += ']';
    }
    out += ' ';
    out += f.name;
    out += '(';
    for (std::size_t j = 0; j < f.params.size(); ++j) {
      if (j) out += ", ";
      out += f.params[j];
    }
    out += ") {\n";
    detail::emit_block(f.body, 1, out);
    out += "}\n";
  }
  return out;
}

}  // namespace difuzz::lang
