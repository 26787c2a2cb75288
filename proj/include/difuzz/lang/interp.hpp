#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "difuzz/lang/ast.hpp"

namespace difuzz::lang {

struct MalformedProgram : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ExecStatus {
  enum class Kind { Normal, Panic, StepLimitExceeded };
  Kind kind = Kind::Normal;
  std::string panic_message;
  SourcePos panic_pos;

  friend bool operator==(const ExecStatus& a, const ExecStatus& b) {
    return a.kind == b.kind && a.panic_message == b.panic_message &&
           (a.kind != Kind::Panic || a.panic_pos == b.panic_pos);
  }
};

struct ExecOutcome {
  ExecStatus status;
  std::string stdout_text;
  std::uint64_t steps = 0;
};

// Instrumentation runtime contract: hooks are registered before `main` runs
// and observe SancovGuard / InstrumentETS calls. Null hooks are ignored.
struct InstrumentationHooks {
  std::function<void(std::uint32_t)> on_guard;
  std::function<void(std::uint32_t)> on_ets;
};

inline constexpr std::uint64_t kDefaultStepLimit = 1'000'000;

// Tree-walking interpreter, resolution done once at construction so repeated
// runs over fuzz inputs stay cheap.
class Interpreter {
 public:
  explicit Interpreter(const Ast& ast) : ast_(&ast) { prepare(); }

  ExecOutcome run(const std::vector<std::uint8_t>& input,
                  std::uint64_t step_limit = kDefaultStepLimit,
                  const InstrumentationHooks* hooks = nullptr) const {
    State st;
    st.input = &input;
    st.step_limit = step_limit;
    st.hooks = hooks;
    Frame frame;
    frame.locals.assign(slot_count_[main_index_], 0);
    Flow flow = exec_block(ast_->functions[main_index_].body, main_index_, frame, st);
    ExecOutcome out;
    out.stdout_text = std::move(st.stdout_text);
    out.steps = st.steps;
    switch (flow) {
      case Flow::Panic:
        out.status.kind = ExecStatus::Kind::Panic;
        out.status.panic_message = st.panic_message;
        out.status.panic_pos = st.panic_pos;
        break;
      case Flow::StepLimit:
        out.status.kind = ExecStatus::Kind::StepLimitExceeded;
        break;
      default:
        out.status.kind = ExecStatus::Kind::Normal;
        break;
    }
    return out;
  }

 private:
  enum class Flow { Normal, Break, Continue, Return, Panic, StepLimit };

  struct Frame {
    std::vector<long long> locals;
  };

  struct State {
    const std::vector<std::uint8_t>* input = nullptr;
    std::uint64_t steps = 0;
    std::uint64_t step_limit = 0;
    int call_depth = 0;
    const InstrumentationHooks* hooks = nullptr;
    std::string stdout_text;
    std::string panic_message;
    SourcePos panic_pos;
  };

  static constexpr int kMaxCallDepth = 256;

  void prepare() {
    main_index_ = -1;
    for (std::size_t i = 0; i < ast_->functions.size(); ++i) {
      const Function& f = ast_->functions[i];
      // A call dispatches to the first declaration with that name.
      if (!fn_index_.count(f.name)) fn_index_[f.name] = static_cast<int>(i);
      if (f.name == "main") main_index_ = static_cast<int>(i);
    }
    if (main_index_ < 0) throw MalformedProgram("no 'main' function");
    slots_.resize(ast_->functions.size());
    slot_count_.resize(ast_->functions.size());
    for (std::size_t i = 0; i < ast_->functions.size(); ++i) {
      auto& m = slots_[i];
      for (const auto& p : ast_->functions[i].params) slot_of(m, p);
      collect_block(ast_->functions[i].body, m, ast_->functions[i]);
      slot_count_[i] = static_cast<int>(m.size());
    }
  }

  static int slot_of(std::map<std::string, int>& m, const std::string& name) {
    auto it = m.find(name);
    if (it != m.end()) return it->second;
    int idx = static_cast<int>(m.size());
    m[name] = idx;
    return idx;
  }

  void collect_block(const Block& b, std::map<std::string, int>& m, const Function& f) {
    for (const auto& s : b.stmts) collect_stmt(*s, m, f);
  }

  void collect_stmt(const Stmt& s, std::map<std::string, int>& m, const Function& f) {
    if (s.kind == Stmt::Kind::Assign) slot_of(m, s.name);
    if (s.expr) collect_expr(*s.expr, m);
    for (const auto& a : s.args) collect_expr(*a, m);
    if (s.kind == Stmt::Kind::Call && s.name != kGuardBuiltin && s.name != kEtsBuiltin) {
      auto it = fn_index_.find(s.name);
      if (it == fn_index_.end())
        throw MalformedProgram("call to unknown function '" + s.name + "' in '" + f.name + "'");
      const Function& callee = ast_->functions[it->second];
      if (callee.params.size() != s.args.size())
        throw MalformedProgram("call to '" + s.name + "' with " +
                               std::to_string(s.args.size()) + " arguments, expected " +
                               std::to_string(callee.params.size()));
    }
    collect_block(s.body, m, f);
    collect_block(s.else_body, m, f);
  }

  void collect_expr(const Expr& e, std::map<std::string, int>& m) {
    if (e.kind == Expr::Kind::Var) slot_of(m, e.name);
    if (e.lhs) collect_expr(*e.lhs, m);
    if (e.rhs) collect_expr(*e.rhs, m);
  }

  Flow eval(const Expr& e, int fn, Frame& fr, State& st, long long& out) const {
    switch (e.kind) {
      case Expr::Kind::IntLit:
        out = e.int_val;
        return Flow::Normal;
      case Expr::Kind::Var:
        out = fr.locals[slots_[fn].at(e.name)];
        return Flow::Normal;
      case Expr::Kind::Input: {
        long long idx;
        Flow f = eval(*e.lhs, fn, fr, st, idx);
        if (f != Flow::Normal) return f;
        const auto& in = *st.input;
        out = (idx >= 0 && static_cast<std::size_t>(idx) < in.size())
                  ? static_cast<long long>(in[static_cast<std::size_t>(idx)])
                  : 0;
        return Flow::Normal;
      }
      case Expr::Kind::InputLen:
        out = static_cast<long long>(st.input->size());
        return Flow::Normal;
      case Expr::Kind::Unary: {
        long long v;
        Flow f = eval(*e.lhs, fn, fr, st, v);
        if (f != Flow::Normal) return f;
        out = e.un == UnOp::Neg ? -v : (v == 0 ? 1 : 0);
        return Flow::Normal;
      }
      case Expr::Kind::Binary: {
        if (e.bin == BinOp::And || e.bin == BinOp::Or) {
          long long l;
          Flow f = eval(*e.lhs, fn, fr, st, l);
          if (f != Flow::Normal) return f;
          bool lt = l != 0;
          if (e.bin == BinOp::And && !lt) { out = 0; return Flow::Normal; }
          if (e.bin == BinOp::Or && lt) { out = 1; return Flow::Normal; }
          long long r;
          f = eval(*e.rhs, fn, fr, st, r);
          if (f != Flow::Normal) return f;
          out = r != 0 ? 1 : 0;
          return Flow::Normal;
        }
        long long l, r;
        Flow f = eval(*e.lhs, fn, fr, st, l);
        if (f != Flow::Normal) return f;
        f = eval(*e.rhs, fn, fr, st, r);
        if (f != Flow::Normal) return f;
        switch (e.bin) {
          case BinOp::Add: out = l + r; break;
          case BinOp::Sub: out = l - r; break;
          case BinOp::Mul: out = l * r; break;
          case BinOp::Div:
          case BinOp::Mod:
            if (r == 0) return panic(st, "division by zero", e.pos);
            out = e.bin == BinOp::Div ? l / r : l % r;
            break;
          case BinOp::Eq: out = l == r; break;
          case BinOp::Ne: out = l != r; break;
          case BinOp::Lt: out = l < r; break;
          case BinOp::Le: out = l <= r; break;
          case BinOp::Gt: out = l > r; break;
          case BinOp::Ge: out = l >= r; break;
          default: out = 0; break;
        }
        return Flow::Normal;
      }
    }
    out = 0;
    return Flow::Normal;
  }

  static Flow panic(State& st, std::string msg, SourcePos pos) {
    st.panic_message = std::move(msg);
    st.panic_pos = std::move(pos);
    return Flow::Panic;
  }

  Flow exec_block(const Block& b, int fn, Frame& fr, State& st) const {
    for (const auto& s : b.stmts) {
      Flow f = exec_stmt(*s, fn, fr, st);
      if (f != Flow::Normal) return f;
    }
    return Flow::Normal;
  }

  Flow exec_stmt(const Stmt& s, int fn, Frame& fr, State& st) const {
    // Instrumentation probes are free: the step budget must cut off an
    // instrumented run at the same source statement as a plain run.
    bool is_probe =
        s.kind == Stmt::Kind::Call && (s.name == kGuardBuiltin || s.name == kEtsBuiltin);
    if (!is_probe && ++st.steps > st.step_limit) return Flow::StepLimit;
    switch (s.kind) {
      case Stmt::Kind::Assign: {
        long long v;
        Flow f = eval(*s.expr, fn, fr, st, v);
        if (f != Flow::Normal) return f;
        fr.locals[slots_[fn].at(s.name)] = v;
        return Flow::Normal;
      }
      case Stmt::Kind::Call: {
        if (s.name == kGuardBuiltin || s.name == kEtsBuiltin) {
          long long id = 0;
          if (!s.args.empty()) {
            Flow f = eval(*s.args[0], fn, fr, st, id);
            if (f != Flow::Normal) return f;
          }
          if (st.hooks) {
            if (s.name == kGuardBuiltin && st.hooks->on_guard)
              st.hooks->on_guard(static_cast<std::uint32_t>(id));
            if (s.name == kEtsBuiltin && st.hooks->on_ets)
              st.hooks->on_ets(static_cast<std::uint32_t>(id));
          }
          return Flow::Normal;
        }
        int callee = fn_index_.at(s.name);
        Frame inner;
        inner.locals.assign(slot_count_[callee], 0);
        for (std::size_t i = 0; i < s.args.size(); ++i) {
          long long v;
          Flow f = eval(*s.args[i], fn, fr, st, v);
          if (f != Flow::Normal) return f;
          inner.locals[static_cast<int>(i)] = v;  // params occupy the first slots
        }
        if (++st.call_depth > kMaxCallDepth) return Flow::StepLimit;
        Flow f = exec_block(ast_->functions[callee].body, callee, inner, st);
        --st.call_depth;
        if (f == Flow::Panic || f == Flow::StepLimit) return f;
        return Flow::Normal;  // Return / fall-off both end the call
      }
      case Stmt::Kind::If: {
        long long c;
        Flow f = eval(*s.expr, fn, fr, st, c);
        if (f != Flow::Normal) return f;
        if (c != 0) return exec_block(s.body, fn, fr, st);
        if (s.has_else) return exec_block(s.else_body, fn, fr, st);
        return Flow::Normal;
      }
      case Stmt::Kind::While: {
        while (true) {
          if (++st.steps > st.step_limit) return Flow::StepLimit;
          long long c;
          Flow f = eval(*s.expr, fn, fr, st, c);
          if (f != Flow::Normal) return f;
          if (c == 0) return Flow::Normal;
          f = exec_block(s.body, fn, fr, st);
          if (f == Flow::Break) return Flow::Normal;
          if (f != Flow::Normal && f != Flow::Continue) return f;
        }
      }
      case Stmt::Kind::Return: {
        if (s.has_value) {
          long long v;
          Flow f = eval(*s.expr, fn, fr, st, v);
          if (f != Flow::Normal) return f;
        }
        return Flow::Return;
      }
      case Stmt::Kind::Panic:
        return panic(st, s.str, s.pos);
      case Stmt::Kind::Print: {
        if (s.print_is_str) {
          st.stdout_text += s.str;
        } else {
          long long v;
          Flow f = eval(*s.expr, fn, fr, st, v);
          if (f != Flow::Normal) return f;
          st.stdout_text += std::to_string(v);
        }
        st.stdout_text += '\n';
        return Flow::Normal;
      }
      case Stmt::Kind::Break:
        return Flow::Break;
      case Stmt::Kind::Continue:
        return Flow::Continue;
    }
    return Flow::Normal;
  }

  const Ast* ast_;
  int main_index_ = -1;
  std::map<std::string, int> fn_index_;
  std::vector<std::map<std::string, int>> slots_;
  std::vector<int> slot_count_;
};

inline ExecOutcome interpret(const Ast& ast, const std::vector<std::uint8_t>& input,
                             std::uint64_t step_limit = kDefaultStepLimit,
                             const InstrumentationHooks* hooks = nullptr) {
  Interpreter interp(ast);
  return interp.run(input, step_limit, hooks);
}

}  // namespace difuzz::lang
