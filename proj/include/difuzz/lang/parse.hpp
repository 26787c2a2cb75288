#pragma once

#include <cctype>
#include <stdexcept>
#include <string>
#include <vector>

#include "difuzz/lang/ast.hpp"

namespace difuzz::lang {

struct SyntaxError : std::runtime_error {
  SyntaxError(SourcePos p, const std::string& msg)
      : std::runtime_error(p.file + ":" + std::to_string(p.line) + ":" +
                           std::to_string(p.col) + ": " + msg),
        pos(std::move(p)),
        message(msg) {}
  SourcePos pos;
  std::string message;
};

namespace detail {

enum class Tok {
  Ident, Int, Str,
  KwFunc, KwIf, KwElse, KwWhile, KwReturn, KwPanic, KwPrint, KwBreak, KwContinue,
  KwInput, KwInputLen,
  LParen, RParen, LBrace, RBrace, LBracket, RBracket, Comma, Semi,
  Assign, Plus, Minus, Star, Slash, Percent,
  Eq, Ne, Lt, Le, Gt, Ge, AndAnd, OrOr, Not,
  End
};

struct Token {
  Tok kind;
  SourcePos pos;
  std::string text;
  long long int_val = 0;
};

inline const char* tok_name(Tok t) {
  switch (t) {
    case Tok::Ident: return "identifier";
    case Tok::Int: return "integer";
    case Tok::Str: return "string literal";
    case Tok::KwFunc: return "'func'";
    case Tok::KwIf: return "'if'";
    case Tok::KwElse: return "'else'";
    case Tok::KwWhile: return "'while'";
    case Tok::KwReturn: return "'return'";
    case Tok::KwPanic: return "'panic'";
    case Tok::KwPrint: return "'print'";
    case Tok::KwBreak: return "'break'";
    case Tok::KwContinue: return "'continue'";
    case Tok::KwInput: return "'input'";
    case Tok::KwInputLen: return "'input_len'";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::LBracket: return "'['";
    case Tok::RBracket: return "']'";
    case Tok::Comma: return "','";
    case Tok::Semi: return "';'";
    case Tok::Assign: return "'='";
    case Tok::Plus: return "'+'";
    case Tok::Minus: return "'-'";
    case Tok::Star: return "'*'";
    case Tok::Slash: return "'/'";
    case Tok::Percent: return "'%'";
    case Tok::Eq: return "'=='";
    case Tok::Ne: return "'!='";
    case Tok::Lt: return "'<'";
    case Tok::Le: return "'<='";
    case Tok::Gt: return "'>'";
    case Tok::Ge: return "'>='";
    case Tok::AndAnd: return "'&&'";
    case Tok::OrOr: return "'||'";
    case Tok::Not: return "'!'";
    case Tok::End: return "end of input";
  }
  return "?";
}

class Lexer {
 public:
  Lexer(std::string text, std::string file)
      : text_(std::move(text)), file_(std::move(file)) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_ws();
      Token t = next();
      bool end = t.kind == Tok::End;
      out.push_back(std::move(t));
      if (end) break;
    }
    return out;
  }

 private:
  SourcePos here() const { return SourcePos{file_, line_, col_}; }

  void skip_ws() {
    while (i_ < text_.size()) {
      char c = text_[i_];
      if (c == '\n') {
        ++line_;
        col_ = 1;
        ++i_;
      } else if (c == ' ' || c == '\t' || c == '\r') {
        advance();
      } else if (c == '/' && i_ + 1 < text_.size() && text_[i_ + 1] == '/') {
        while (i_ < text_.size() && text_[i_] != '\n') advance();
      } else {
        break;
      }
    }
  }

  void advance() {
    ++i_;
    ++col_;
  }

  Token next() {
    SourcePos p = here();
    if (i_ >= text_.size()) return {Tok::End, p, ""};
    char c = text_[i_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string word;
      while (i_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[i_])) || text_[i_] == '_')) {
        word += text_[i_];
        advance();
      }
      Tok k = keyword(word);
      return {k, p, word};
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      long long v = 0;
      std::string word;
      while (i_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[i_]))) {
        v = v * 10 + (text_[i_] - '0');
        word += text_[i_];
        advance();
      }
      Token t{Tok::Int, p, word};
      t.int_val = v;
      return t;
    }
    if (c == '"') {
      advance();
      std::string s;
      while (i_ < text_.size() && text_[i_] != '"') {
        if (text_[i_] == '\n') throw SyntaxError(p, "unterminated string literal");
        if (text_[i_] == '\\') {
          advance();
          if (i_ >= text_.size()) throw SyntaxError(p, "unterminated string literal");
          char e = text_[i_];
          if (e == 'n') s += '\n';
          else if (e == 't') s += '\t';
          else if (e == '"') s += '"';
          else if (e == '\\') s += '\\';
          else throw SyntaxError(here(), "unknown escape sequence");
          advance();
        } else {
          s += text_[i_];
          advance();
        }
      }
      if (i_ >= text_.size()) throw SyntaxError(p, "unterminated string literal");
      advance();  // closing quote
      return {Tok::Str, p, s};
    }
    switch (c) {
      case '(': advance(); return {Tok::LParen, p, "("};
      case ')': advance(); return {Tok::RParen, p, ")"};
      case '{': advance(); return {Tok::LBrace, p, "{"};
      case '}': advance(); return {Tok::RBrace, p, "}"};
      case '[': advance(); return {Tok::LBracket, p, "["};
      case ']': advance(); return {Tok::RBracket, p, "]"};
      case ',': advance(); return {Tok::Comma, p, ","};
      case ';': advance(); return {Tok::Semi, p, ";"};
      case '+': advance(); return {Tok::Plus, p, "+"};
      case '-': advance(); return {Tok::Minus, p, "-"};
      case '*': advance(); return {Tok::Star, p, "*"};
      case '/': advance(); return {Tok::Slash, p, "/"};
      case '%': advance(); return {Tok::Percent, p, "%"};
      case '=':
        advance();
        if (i_ < text_.size() && text_[i_] == '=') { advance(); return {Tok::Eq, p, "=="}; }
        return {Tok::Assign, p, "="};
      case '!':
        advance();
        if (i_ < text_.size() && text_[i_] == '=') { advance(); return {Tok::Ne, p, "!="}; }
        return {Tok::Not, p, "!"};
      case '<':
        advance();
        if (i_ < text_.size() && text_[i_] == '=') { advance(); return {Tok::Le, p, "<="}; }
        return {Tok::Lt, p, "<"};
      case '>':
        advance();
        if (i_ < text_.size() && text_[i_] == '=') { advance(); return {Tok::Ge, p, ">="}; }
        return {Tok::Gt, p, ">"};
      case '&':
        advance();
        if (i_ < text_.size() && text_[i_] == '&') { advance(); return {Tok::AndAnd, p, "&&"}; }
        throw SyntaxError(p, "expected '&&'");
      case '|':
        advance();
        if (i_ < text_.size() && text_[i_] == '|') { advance(); return {Tok::OrOr, p, "||"}; }
        throw SyntaxError(p, "expected '||'");
      default:
        throw SyntaxError(p, std::string("unexpected character '") + c + "'");
    }
  }

  static Tok keyword(const std::string& w) {
    if (w == "func") return Tok::KwFunc;
    if (w == "if") return Tok::KwIf;
    if (w == "else") return Tok::KwElse;
    if (w == "while") return Tok::KwWhile;
    if (w == "return") return Tok::KwReturn;
    if (w == "panic") return Tok::KwPanic;
    if (w == "print") return Tok::KwPrint;
    if (w == "break") return Tok::KwBreak;
    if (w == "continue") return Tok::KwContinue;
    if (w == "input") return Tok::KwInput;
    if (w == "input_len") return Tok::KwInputLen;
    return Tok::Ident;
  }

  std::string text_;
  std::string file_;
  std::size_t i_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class Parser {
 public:
  Parser(std::vector<Token> toks, std::string file)
      : toks_(std::move(toks)), file_(std::move(file)) {}

  Ast run() {
    Ast ast;
    ast.file = file_;
    while (!at(Tok::End)) parse_function(ast);
    validate(ast);
    return ast;
  }

 private:
  const Token& peek(int off = 0) const {
    std::size_t i = i_ + off;
    if (i >= toks_.size()) i = toks_.size() - 1;
    return toks_[i];
  }
  bool at(Tok k) const { return peek().kind == k; }
  Token take() { return toks_[i_ < toks_.size() - 1 ? i_++ : i_]; }

  Token expect(Tok k, const char* what) {
    if (!at(k))
      throw SyntaxError(peek().pos, std::string("expected ") + what + ", found " +
                                        tok_name(peek().kind));
    return take();
  }

  void parse_function(Ast& ast) {
    Token kw = expect(Tok::KwFunc, "'func'");
    int instances = 1;
    if (at(Tok::LBracket)) {
      take();
      Token n = expect(Tok::Int, "instance count");
      if (n.int_val < 1) throw SyntaxError(n.pos, "instance count must be >= 1");
      instances = static_cast<int>(n.int_val);
      expect(Tok::RBracket, "']'");
    }
    Token name = expect(Tok::Ident, "function name");
    expect(Tok::LParen, "'('");
    std::vector<std::string> params;
    if (!at(Tok::RParen)) {
      params.push_back(expect(Tok::Ident, "parameter name").text);
      while (at(Tok::Comma)) {
        take();
        params.push_back(expect(Tok::Ident, "parameter name").text);
      }
    }
    Token close = expect(Tok::RParen, "')'");
    Function f;
    f.name = name.text;
    f.params = std::move(params);
    f.pos = kw.pos;
    f.header_line = close.pos.line;
    f.body = parse_block(ast);
    f.end_line = f.body.close_line;
    f.instances = instances;
    // Expand `func[k]` into k duplicate-position declarations.
    for (int occ = 0; occ < instances; ++occ) {
      Function copy;
      copy.name = f.name;
      copy.params = f.params;
      copy.body = clone_block(f.body);
      copy.pos = f.pos;
      copy.header_line = f.header_line;
      copy.end_line = f.end_line;
      copy.instances = instances;
      copy.occurrence = occ;
      ast.functions.push_back(std::move(copy));
    }
  }

  Block parse_block(Ast& ast) {
    Block b;
    Token open = expect(Tok::LBrace, "'{'");
    b.open_line = open.pos.line;
    while (!at(Tok::RBrace)) {
      if (at(Tok::End)) throw SyntaxError(peek().pos, "expected '}', found end of input");
      b.stmts.push_back(parse_stmt(ast));
    }
    Token close = take();
    b.close_line = close.pos.line;
    return b;
  }

  StmtPtr parse_stmt(Ast& ast) {
    auto s = std::make_unique<Stmt>();
    s->stmt_id = ast.next_stmt_id++;
    const Token& t = peek();
    s->pos = t.pos;
    switch (t.kind) {
      case Tok::KwIf: {
        take();
        s->kind = Stmt::Kind::If;
        s->expr = parse_expr();
        s->body = parse_block(ast);
        s->end_line = s->body.close_line;
        if (at(Tok::KwElse)) {
          take();
          s->has_else = true;
          s->else_body = parse_block(ast);
          s->end_line = s->else_body.close_line;
        }
        return s;
      }
      case Tok::KwWhile: {
        take();
        s->kind = Stmt::Kind::While;
        s->expr = parse_expr();
        s->body = parse_block(ast);
        s->end_line = s->body.close_line;
        return s;
      }
      case Tok::KwReturn: {
        take();
        s->kind = Stmt::Kind::Return;
        if (!at(Tok::Semi)) {
          s->has_value = true;
          s->expr = parse_expr();
        }
        break;
      }
      case Tok::KwPanic: {
        take();
        s->kind = Stmt::Kind::Panic;
        expect(Tok::LParen, "'('");
        s->str = expect(Tok::Str, "string literal").text;
        expect(Tok::RParen, "')'");
        break;
      }
      case Tok::KwPrint: {
        take();
        s->kind = Stmt::Kind::Print;
        expect(Tok::LParen, "'('");
        if (at(Tok::Str)) {
          s->print_is_str = true;
          s->str = take().text;
        } else {
          s->expr = parse_expr();
        }
        expect(Tok::RParen, "')'");
        break;
      }
      case Tok::KwBreak:
        take();
        s->kind = Stmt::Kind::Break;
        break;
      case Tok::KwContinue:
        take();
        s->kind = Stmt::Kind::Continue;
        break;
      case Tok::Ident: {
        Token id = take();
        s->name = id.text;
        if (at(Tok::Assign)) {
          take();
          s->kind = Stmt::Kind::Assign;
          s->expr = parse_expr();
        } else if (at(Tok::LParen)) {
          take();
          s->kind = Stmt::Kind::Call;
          if (!at(Tok::RParen)) {
            s->args.push_back(parse_expr());
            while (at(Tok::Comma)) {
              take();
              s->args.push_back(parse_expr());
            }
          }
          expect(Tok::RParen, "')'");
        } else {
          throw SyntaxError(peek().pos,
                            "expected '=' or '(' after identifier, found " +
                                std::string(tok_name(peek().kind)));
        }
        break;
      }
      default:
        throw SyntaxError(t.pos, std::string("expected statement, found ") + tok_name(t.kind));
    }
    s->end_line = s->pos.line;
    // Semicolons terminate simple statements; the last one before '}' may
    // omit it.
    if (at(Tok::Semi))
      take();
    else if (!at(Tok::RBrace))
      expect(Tok::Semi, "';'");
    return s;
  }

  // Precedence climbing: || < && < comparison < additive < multiplicative < unary.
  ExprPtr parse_expr() { return parse_or(); }

  ExprPtr parse_or() {
    ExprPtr e = parse_and();
    while (at(Tok::OrOr)) {
      Token op = take();
      e = make_bin(BinOp::Or, std::move(e), parse_and(), op.pos);
    }
    return e;
  }
  ExprPtr parse_and() {
    ExprPtr e = parse_cmp();
    while (at(Tok::AndAnd)) {
      Token op = take();
      e = make_bin(BinOp::And, std::move(e), parse_cmp(), op.pos);
    }
    return e;
  }
  ExprPtr parse_cmp() {
    ExprPtr e = parse_add();
    while (true) {
      BinOp op;
      switch (peek().kind) {
        case Tok::Eq: op = BinOp::Eq; break;
        case Tok::Ne: op = BinOp::Ne; break;
        case Tok::Lt: op = BinOp::Lt; break;
        case Tok::Le: op = BinOp::Le; break;
        case Tok::Gt: op = BinOp::Gt; break;
        case Tok::Ge: op = BinOp::Ge; break;
        default: return e;
      }
      Token t = take();
      e = make_bin(op, std::move(e), parse_add(), t.pos);
    }
  }
  ExprPtr parse_add() {
    ExprPtr e = parse_mul();
    while (at(Tok::Plus) || at(Tok::Minus)) {
      Token t = take();
      e = make_bin(t.kind == Tok::Plus ? BinOp::Add : BinOp::Sub, std::move(e), parse_mul(),
                   t.pos);
    }
    return e;
  }
  ExprPtr parse_mul() {
    ExprPtr e = parse_unary();
    while (at(Tok::Star) || at(Tok::Slash) || at(Tok::Percent)) {
      Token t = take();
      BinOp op = t.kind == Tok::Star ? BinOp::Mul
               : t.kind == Tok::Slash ? BinOp::Div
                                      : BinOp::Mod;
      e = make_bin(op, std::move(e), parse_unary(), t.pos);
    }
    return e;
  }
  ExprPtr parse_unary() {
    if (at(Tok::Minus) || at(Tok::Not)) {
      Token t = take();
      auto e = std::make_unique<Expr>();
      e->kind = Expr::Kind::Unary;
      e->pos = t.pos;
      e->un = t.kind == Tok::Minus ? UnOp::Neg : UnOp::Not;
      e->lhs = parse_unary();
      return e;
    }
    return parse_primary();
  }
  ExprPtr parse_primary() {
    const Token& t = peek();
    auto e = std::make_unique<Expr>();
    e->pos = t.pos;
    switch (t.kind) {
      case Tok::Int:
        e->kind = Expr::Kind::IntLit;
        e->int_val = take().int_val;
        return e;
      case Tok::Ident:
        e->kind = Expr::Kind::Var;
        e->name = take().text;
        return e;
      case Tok::KwInput:
        take();
        expect(Tok::LParen, "'('");
        e->kind = Expr::Kind::Input;
        e->lhs = parse_expr();
        expect(Tok::RParen, "')'");
        return e;
      case Tok::KwInputLen:
        take();
        expect(Tok::LParen, "'('");
        expect(Tok::RParen, "')'");
        e->kind = Expr::Kind::InputLen;
        return e;
      case Tok::LParen: {
        take();
        ExprPtr inner = parse_expr();
        expect(Tok::RParen, "')'");
        return inner;
      }
      default:
        throw SyntaxError(t.pos,
                          std::string("expected expression, found ") + tok_name(t.kind));
    }
  }

  static ExprPtr make_bin(BinOp op, ExprPtr l, ExprPtr r, SourcePos pos) {
    auto e = std::make_unique<Expr>();
    e->kind = Expr::Kind::Binary;
    e->pos = std::move(pos);
    e->bin = op;
    e->lhs = std::move(l);
    e->rhs = std::move(r);
    return e;
  }

  // Per-file validation. "Exactly one main" is a whole-program rule (a
  // project may span several files), enforced where files are assembled and
  // by the interpreter; here we only check main's shape when present.
  void validate(const Ast& ast) {
    for (const auto& f : ast.functions) {
      if (f.name == "main") {
        if (!f.params.empty())
          throw SyntaxError(f.pos, "'main' must take no parameters");
        if (f.instances != 1)
          throw SyntaxError(f.pos, "'main' cannot be duplicated");
      }
    }
    // Names must be unique except across duplicate-position instances of the
    // same declaration.
    for (std::size_t i = 0; i < ast.functions.size(); ++i) {
      for (std::size_t j = i + 1; j < ast.functions.size(); ++j) {
        const Function& a = ast.functions[i];
        const Function& b = ast.functions[j];
        if (a.name == b.name && !(a.pos == b.pos))
          throw SyntaxError(b.pos, "duplicate function name '" + b.name + "'");
      }
    }
  }

  std::vector<Token> toks_;
  std::string file_;
  std::size_t i_ = 0;
};

}  // namespace detail

inline Ast parse(const std::string& source_text, const std::string& file) {
  detail::Lexer lex(source_text, file);
  detail::Parser p(lex.run(), file);
  return p.run();
}

}  // namespace difuzz::lang
