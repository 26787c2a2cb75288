#pragma once

// Random MiniProc program generator for property tests. Emits source text so
// every generated program also exercises the lexer/parser and carries
// faithful line information.

#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace testgen {

using Rng = std::mt19937_64;

inline std::uint64_t below(Rng& rng, std::uint64_t n) { return n ? rng() % n : 0; }

struct GenOptions {
  int max_extra_functions = 3;  // besides main
  int max_stmts = 4;            // per statement list
  int max_depth = 2;            // nesting of if/while
  bool allow_panic = true;
  bool allow_duplicates = true;  // func[k] declarations
};

class ProgramGen {
 public:
  ProgramGen(Rng& rng, GenOptions opts = {}) : rng_(rng), opts_(opts) {}

  std::string generate() {
    src_.str("");
    int extra = static_cast<int>(below(rng_, static_cast<std::uint64_t>(
                                                opts_.max_extra_functions + 1)));
    fn_names_.clear();
    for (int i = 0; i < extra; ++i) fn_names_.push_back("f" + std::to_string(i));
    // Helpers first, main last; calls may reference any helper (cycles are
    // allowed, the interpreter's depth cap bounds them).
    for (const auto& name : fn_names_) emit_function(name);
    emit_function("main");
    return src_.str();
  }

 private:
  void emit_function(const std::string& name) {
    bool dup = opts_.allow_duplicates && name != "main" && below(rng_, 5) == 0;
    src_ << "func";
    if (dup) src_ << "[" << (2 + below(rng_, 2)) << "]";
    src_ << " " << name << "(";
    int params = name == "main" ? 0 : arity_of(name);
    for (int i = 0; i < params; ++i) src_ << (i ? ", " : "") << "p" << i;
    src_ << ") {\n";
    emit_stmts(1, 0, false);
    src_ << "}\n";
  }

  void indent(int depth) {
    for (int i = 0; i < depth; ++i) src_ << "    ";
  }

  void emit_stmts(int depth, int nest, bool in_loop) {
    int n = 1 + static_cast<int>(below(rng_, static_cast<std::uint64_t>(opts_.max_stmts)));
    for (int i = 0; i < n; ++i) emit_stmt(depth, nest, in_loop);
  }

  void emit_stmt(int depth, int nest, bool in_loop) {
    int choice = static_cast<int>(below(rng_, 10));
    if (nest >= opts_.max_depth && (choice == 5 || choice == 6)) choice = 0;
    switch (choice) {
      case 0:
      case 1:
      case 2: {  // assignment
        indent(depth);
        src_ << var() << " = " << expr(2) << ";\n";
        break;
      }
      case 3: {  // print
        indent(depth);
        if (below(rng_, 2))
          src_ << "print(\"m" << below(rng_, 10) << "\");\n";
        else
          src_ << "print(" << expr(2) << ");\n";
        break;
      }
      case 4: {  // call
        if (fn_names_.empty()) {
          indent(depth);
          src_ << var() << " = " << expr(1) << ";\n";
          break;
        }
        const std::string& callee = fn_names_[below(rng_, fn_names_.size())];
        indent(depth);
        src_ << callee << "(";
        // Arity must match; regenerate deterministically from the name.
        int arity = arity_of(callee);
        for (int i = 0; i < arity; ++i) src_ << (i ? ", " : "") << expr(1);
        src_ << ");\n";
        break;
      }
      case 5: {  // if / if-else
        indent(depth);
        src_ << "if (" << expr(2) << ") {\n";
        emit_stmts(depth + 1, nest + 1, in_loop);
        if (below(rng_, 2)) {
          indent(depth);
          src_ << "} else {\n";
          emit_stmts(depth + 1, nest + 1, in_loop);
        }
        indent(depth);
        src_ << "}\n";
        break;
      }
      case 6: {  // bounded counting loop
        std::string lv = "l" + std::to_string(loop_counter_++);
        indent(depth);
        src_ << lv << " = 0;\n";
        indent(depth);
        src_ << "while (" << lv << " < " << (1 + below(rng_, 5)) << ") {\n";
        emit_stmts(depth + 1, nest + 1, true);
        indent(depth + 1);
        src_ << lv << " = " << lv << " + 1;\n";
        indent(depth);
        src_ << "}\n";
        break;
      }
      case 7: {  // panic or return
        indent(depth);
        if (opts_.allow_panic && below(rng_, 3) == 0)
          src_ << "panic(\"p" << below(rng_, 100) << "\");\n";
        else
          src_ << "return;\n";
        break;
      }
      case 8: {  // break / continue if possible
        if (in_loop && below(rng_, 2)) {
          indent(depth);
          src_ << (below(rng_, 2) ? "break;\n" : "continue;\n");
        } else {
          indent(depth);
          src_ << var() << " = " << expr(1) << ";\n";
        }
        break;
      }
      default: {  // input-dependent assignment
        indent(depth);
        src_ << var() << " = input(" << below(rng_, 8) << ");\n";
        break;
      }
    }
  }

  // Fixed arity per helper name so call sites always agree.
  int arity_of(const std::string& name) {
    std::uint64_t h = 1469598103934665603ULL;
    for (char c : name) {
      h ^= static_cast<unsigned char>(c);
      h *= 1099511628211ULL;
    }
    return static_cast<int>(h % 3);
  }

  std::string var() { return "v" + std::to_string(below(rng_, 4)); }

  std::string expr(int depth) {
    if (depth <= 0 || below(rng_, 3) == 0) {
      switch (below(rng_, 4)) {
        case 0: return std::to_string(below(rng_, 256));
        case 1: return var();
        case 2: return "input(" + std::to_string(below(rng_, 8)) + ")";
        default: return "input_len()";
      }
    }
    switch (below(rng_, 8)) {
      case 0: return "(" + expr(depth - 1) + " + " + expr(depth - 1) + ")";
      case 1: return "(" + expr(depth - 1) + " - " + expr(depth - 1) + ")";
      case 2: return "(" + expr(depth - 1) + " * " + std::to_string(below(rng_, 5)) + ")";
      case 3:  // non-zero divisor keeps generated programs panic-free here
        return "(" + expr(depth - 1) + " % " + std::to_string(1 + below(rng_, 7)) + ")";
      case 4: return "(" + expr(depth - 1) + " == " + expr(depth - 1) + ")";
      case 5: return "(" + expr(depth - 1) + " < " + expr(depth - 1) + ")";
      case 6: return "(" + expr(depth - 1) + " && " + expr(depth - 1) + ")";
      default: return "!(" + expr(depth - 1) + ")";
    }
  }

  Rng& rng_;
  GenOptions opts_;
  std::ostringstream src_;
  std::vector<std::string> fn_names_;
  int loop_counter_ = 0;
};

inline std::vector<std::uint8_t> random_input(Rng& rng, std::size_t max_len = 16) {
  std::size_t len = below(rng, max_len + 1);
  std::vector<std::uint8_t> in(len);
  for (auto& b : in) b = static_cast<std::uint8_t>(below(rng, 256));
  return in;
}

}  // namespace testgen
