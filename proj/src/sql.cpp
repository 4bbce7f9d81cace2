/*
 * Copyright 2026 The fragdb Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include "fragdb/sql.hpp"

#include <cctype>
#include <charconv>
#include <cstdlib>
#include <string>

#include "fragdb/error.hpp"

namespace fragdb::sql {

bool SetExpr::operator==(const SetExpr& other) const { return terms == other.terms; }

namespace {

enum class Tok : std::uint8_t { Ident, Int, Real, String, Param, Sym, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;  // identifiers keep their spelling; symbols are ASCII
  std::size_t pos = 0;
};

std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      if (i_ >= text_.size()) break;
      out.push_back(next());
    }
    out.push_back({Tok::End, "", text_.size()});
    return out;
  }

 private:
  void skip_space() {
    while (i_ < text_.size()) {
      const char c = text_[i_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++i_;
      } else if (c == '-' && i_ + 1 < text_.size() && text_[i_ + 1] == '-') {
        while (i_ < text_.size() && text_[i_] != '\n') ++i_;
      } else {
        break;
      }
    }
  }

  bool match_utf8(std::string_view seq) {
    if (text_.substr(i_, seq.size()) != seq) return false;
    i_ += seq.size();
    return true;
  }

  Token next() {
    const std::size_t start = i_;
    const char c = text_[i_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (i_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[i_])) || text_[i_] == '_'))
        ++i_;
      return {Tok::Ident, std::string(text_.substr(start, i_ - start)), start};
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      bool real = false;
      while (i_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[i_]))) ++i_;
      if (i_ + 1 < text_.size() && text_[i_] == '.' &&
          std::isdigit(static_cast<unsigned char>(text_[i_ + 1]))) {
        real = true;
        ++i_;
        while (i_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[i_]))) ++i_;
      }
      return {real ? Tok::Real : Tok::Int, std::string(text_.substr(start, i_ - start)), start};
    }
    if (c == '\'') {
      std::string s;
      ++i_;
      for (;;) {
        if (i_ >= text_.size()) fail(Errc::SyntaxError, where(start) + ": unterminated string literal");
        if (text_[i_] == '\'') {
          if (i_ + 1 < text_.size() && text_[i_ + 1] == '\'') {
            s += '\'';
            i_ += 2;
            continue;
          }
          ++i_;
          break;
        }
        s += text_[i_++];
      }
      return {Tok::String, s, start};
    }
    if (c == '?') {
      ++i_;
      return {Tok::Param, "?", start};
    }
    // Typeset operators that appear in copied query listings.
    if (match_utf8("\xC3\x97") || match_utf8("\xE2\x8B\x86") || match_utf8("\xE2\x88\x97") ||
        match_utf8("\xE2\x98\x85"))
      return {Tok::Sym, "*", start};
    if (match_utf8("\xE2\x88\x92")) return {Tok::Sym, "-", start};
    for (std::string_view two : {"<=", ">=", "<>", "!=", "||"}) {
      if (text_.substr(i_, 2) == two) {
        i_ += 2;
        return {Tok::Sym, std::string(two), start};
      }
    }
    if (std::string_view("(),.;*+-/=<>").find(c) != std::string_view::npos) {
      ++i_;
      return {Tok::Sym, std::string(1, c), start};
    }
    fail(Errc::SyntaxError, where(start) + ": unexpected character '" + std::string(1, c) + "'");
  }

 public:
  std::string where(std::size_t pos) const {
    std::size_t line = 1, col = 1;
    for (std::size_t k = 0; k < pos && k < text_.size(); ++k) {
      if (text_[k] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    return std::to_string(line) + ":" + std::to_string(col);
  }

 private:
  std::string_view text_;
  std::size_t i_ = 0;
};

// Recognized SQL that lies outside the subset.
bool unsupported_keyword(const std::string& kw) {
  static const char* const kWords[] = {"OR",     "NOT",   "LEFT",    "RIGHT",  "FULL",  "OUTER",
                                       "CROSS",  "UNION", "EXCEPT",  "HAVING", "ORDER", "LIMIT",
                                       "DISTINCT", "EXISTS", "BETWEEN", "LIKE", "NATURAL", "USING",
                                       "CASE",   "OFFSET", "WITH"};
  for (const char* w : kWords)
    if (kw == w) return true;
  return false;
}

bool reserved(const std::string& kw) {
  static const char* const kWords[] = {"SELECT", "FROM", "WHERE", "GROUP", "BY",  "JOIN",
                                       "INNER",  "ON",   "AND",   "IN",    "AS",  "INTERSECT"};
  for (const char* w : kWords)
    if (kw == w) return true;
  return unsupported_keyword(kw);
}

class Parser {
 public:
  Parser(std::string_view text) : lexer_(text), toks_(lexer_.run()) {}

  Statement statement() {
    Statement st;
    st.select = select();
    accept_sym(";");
    if (peek().kind != Tok::End) unexpected(peek());
    st.param_count = params_;
    return st;
  }

 private:
  const Token& peek(std::size_t k = 0) const {
    return toks_[std::min(i_ + k, toks_.size() - 1)];
  }
  const Token& take() { return toks_[std::min(i_++, toks_.size() - 1)]; }

  bool is_kw(const Token& t, const char* kw) const {
    return t.kind == Tok::Ident && upper(t.text) == kw;
  }
  bool is_sym(const Token& t, const char* s) const { return t.kind == Tok::Sym && t.text == s; }

  bool accept_kw(const char* kw) {
    if (!is_kw(peek(), kw)) return false;
    ++i_;
    return true;
  }
  bool accept_sym(const char* s) {
    if (!is_sym(peek(), s)) return false;
    ++i_;
    return true;
  }
  void expect_kw(const char* kw) {
    if (!accept_kw(kw)) unexpected(peek(), std::string("expected ") + kw);
  }
  void expect_sym(const char* s) {
    if (!accept_sym(s)) unexpected(peek(), std::string("expected '") + s + "'");
  }

  [[noreturn]] void unexpected(const Token& t, const std::string& hint = "") {
    if (t.kind == Tok::Ident && unsupported_keyword(upper(t.text)))
      fail(Errc::UnsupportedFeature, lexer_.where(t.pos) + ": " + upper(t.text) + " is not supported");
    std::string what = t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
    fail(Errc::SyntaxError,
         lexer_.where(t.pos) + ": unexpected " + what + (hint.empty() ? "" : " (" + hint + ")"));
  }

  [[noreturn]] void unsupported(const Token& t, const std::string& what) {
    fail(Errc::UnsupportedFeature, lexer_.where(t.pos) + ": " + what);
  }

  std::string ident(const char* what) {
    const Token& t = peek();
    if (t.kind != Tok::Ident || reserved(upper(t.text))) unexpected(t, std::string("expected ") + what);
    ++i_;
    return t.text;
  }

  Select select() {
    Select s;
    s.pos = peek().pos;
    expect_kw("SELECT");
    if (is_kw(peek(), "DISTINCT")) unsupported(peek(), "DISTINCT is not supported");
    do {
      if (is_sym(peek(), "*")) unsupported(peek(), "SELECT * is not supported; list the key and aggregate");
      s.items.push_back(expr());
      if (accept_kw("AS")) ident("column alias");
    } while (accept_sym(","));
    expect_kw("FROM");
    do {
      join_expr(s);
    } while (accept_sym(","));
    if (accept_kw("WHERE")) {
      do {
        s.where.push_back(predicate());
      } while (accept_kw("AND"));
      if (is_kw(peek(), "OR")) unsupported(peek(), "OR is not supported");
    }
    if (accept_kw("GROUP")) {
      expect_kw("BY");
      do {
        s.group_by.push_back(column_ref());
      } while (accept_sym(","));
    }
    if (peek().kind == Tok::Ident && unsupported_keyword(upper(peek().text))) unexpected(peek());
    return s;
  }

  void join_expr(Select& s) {
    from_primary(s);
    for (;;) {
      if (peek().kind == Tok::Ident) {
        const std::string kw = upper(peek().text);
        if (kw == "LEFT" || kw == "RIGHT" || kw == "FULL" || kw == "OUTER" || kw == "CROSS" ||
            kw == "NATURAL")
          unsupported(peek(), kw + " joins are not supported");
      }
      if (accept_kw("INNER")) {
        expect_kw("JOIN");
      } else if (!accept_kw("JOIN")) {
        return;
      }
      from_primary(s);
      expect_kw("ON");
      do {
        Predicate p = predicate();
        if (p.kind != Predicate::Kind::Eq)
          fail(Errc::UnsupportedFeature, lexer_.where(p.pos) + ": IN inside ON is not supported");
        s.on.push_back(std::move(p));
      } while (accept_kw("AND"));
    }
  }

  void from_primary(Select& s) {
    if (is_sym(peek(), "(")) {
      if (is_kw(peek(1), "SELECT")) unsupported(peek(1), "subqueries in FROM are not supported");
      ++i_;
      join_expr(s);
      expect_sym(")");
      return;
    }
    TableRef t;
    t.pos = peek().pos;
    t.table = ident("table name");
    if (accept_kw("AS")) {
      t.alias = ident("table alias");
    } else if (peek().kind == Tok::Ident && !reserved(upper(peek().text))) {
      t.alias = take().text;
    } else {
      t.alias = t.table;
    }
    s.from.push_back(std::move(t));
  }

  Predicate predicate() {
    Predicate p;
    p.pos = peek().pos;
    if (is_kw(peek(), "NOT") || is_kw(peek(), "EXISTS")) unexpected(peek());
    p.lhs = expr();
    if (accept_kw("IN")) {
      p.kind = Predicate::Kind::In;
      set_primary(p.set);
      while (accept_kw("INTERSECT")) set_term(p.set);
      return p;
    }
    if (is_kw(peek(), "NOT") || is_kw(peek(), "BETWEEN") || is_kw(peek(), "LIKE")) unexpected(peek());
    const Token& op = peek();
    if (op.kind == Tok::Sym && (op.text == "<" || op.text == ">" || op.text == "<=" ||
                                op.text == ">=" || op.text == "<>" || op.text == "!="))
      unsupported(op, "comparison '" + op.text + "' is not supported; only '=' is");
    expect_sym("=");
    p.rhs = expr();
    return p;
  }

  // '(' SELECT ... [INTERSECT ...] ')' or '(' '(' ... ')' ... ')'
  void set_primary(SetExpr& out) {
    expect_sym("(");
    set_term(out);
    while (accept_kw("INTERSECT")) set_term(out);
    expect_sym(")");
  }

  void set_term(SetExpr& out) {
    if (is_kw(peek(), "SELECT")) {
      out.terms.push_back(select());
    } else if (is_sym(peek(), "(")) {
      set_primary(out);
    } else {
      unexpected(peek(), "expected a subquery");
    }
  }

  ColumnRef column_ref() {
    ColumnRef c;
    c.pos = peek().pos;
    c.name = ident("column");
    if (accept_sym(".")) {
      c.qualifier = std::move(c.name);
      c.name = ident("column");
    }
    return c;
  }

  Expr expr() {
    Expr lhs = term();
    for (;;) {
      ExprKind k;
      if (is_sym(peek(), "+")) {
        k = ExprKind::Add;
      } else if (is_sym(peek(), "-")) {
        k = ExprKind::Sub;
      } else if (is_sym(peek(), "||")) {
        unsupported(peek(), "string concatenation is not supported");
      } else {
        return lhs;
      }
      const std::size_t pos = take().pos;
      Expr e;
      e.kind = k;
      e.pos = pos;
      e.args.push_back(std::move(lhs));
      e.args.push_back(term());
      lhs = std::move(e);
    }
  }

  Expr term() {
    Expr lhs = unary();
    for (;;) {
      ExprKind k;
      if (is_sym(peek(), "*")) {
        k = ExprKind::Mul;
      } else if (is_sym(peek(), "/")) {
        k = ExprKind::Div;
      } else {
        return lhs;
      }
      const std::size_t pos = take().pos;
      Expr e;
      e.kind = k;
      e.pos = pos;
      e.args.push_back(std::move(lhs));
      e.args.push_back(unary());
      lhs = std::move(e);
    }
  }

  Expr unary() {
    if (is_sym(peek(), "-")) {
      Expr e;
      e.kind = ExprKind::Neg;
      e.pos = take().pos;
      e.args.push_back(unary());
      return e;
    }
    return primary();
  }

  Expr primary() {
    const Token& t = peek();
    Expr e;
    e.pos = t.pos;
    switch (t.kind) {
      case Tok::Int: {
        ++i_;
        e.kind = ExprKind::Int;
        auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), e.ival);
        if (ec != std::errc()) fail(Errc::SyntaxError, lexer_.where(t.pos) + ": integer literal out of range");
        return e;
      }
      case Tok::Real:
        ++i_;
        e.kind = ExprKind::Real;
        e.rval = std::strtod(t.text.c_str(), nullptr);
        return e;
      case Tok::String:
        ++i_;
        e.kind = ExprKind::String;
        e.text = t.text;
        return e;
      case Tok::Param:
        ++i_;
        e.kind = ExprKind::Param;
        e.param = params_++;
        return e;
      case Tok::Sym:
        if (t.text == "(") {
          ++i_;
          if (is_kw(peek(), "SELECT")) unsupported(peek(), "scalar subqueries are not supported");
          e = expr();
          expect_sym(")");
          return e;
        }
        unexpected(t);
      case Tok::Ident:
        break;
      case Tok::End:
        unexpected(t);
    }
    if (is_sym(peek(1), "(")) {
      const std::string fn = upper(t.text);
      if (fn == "CASE" || fn == "EXISTS") unexpected(t);
      i_ += 2;
      e.kind = fn == "ABS" ? ExprKind::Abs : ExprKind::Call;
      e.text = fn;
      if (is_kw(peek(), "DISTINCT")) unsupported(peek(), "DISTINCT aggregates are not supported");
      if (is_sym(peek(), "*")) {
        Expr star;
        star.kind = ExprKind::Star;
        star.pos = take().pos;
        e.args.push_back(std::move(star));
      } else if (!is_sym(peek(), ")")) {
        do {
          e.args.push_back(expr());
        } while (accept_sym(","));
      }
      expect_sym(")");
      if (e.kind == ExprKind::Abs && e.args.size() != 1)
        fail(Errc::SyntaxError, lexer_.where(t.pos) + ": abs takes one argument");
      return e;
    }
    e.kind = ExprKind::Column;
    e.column = column_ref();
    e.pos = e.column.pos;
    return e;
  }

  Lexer lexer_;
  std::vector<Token> toks_;
  std::size_t i_ = 0;
  std::size_t params_ = 0;
};

}  // namespace

Statement parse_sql(std::string_view text) { return Parser(text).statement(); }

std::string format_expr(const Expr& e) {
  auto bin = [&](const char* op) {
    return "(" + format_expr(e.args[0]) + " " + op + " " + format_expr(e.args[1]) + ")";
  };
  switch (e.kind) {
    case ExprKind::Int: return std::to_string(e.ival);
    case ExprKind::Real: {
      std::string s = std::to_string(e.rval);
      return s;
    }
    case ExprKind::String: return "'" + e.text + "'";
    case ExprKind::Param: return "?" + std::to_string(e.param);
    case ExprKind::Column:
      return e.column.qualifier.empty() ? e.column.name : e.column.qualifier + "." + e.column.name;
    case ExprKind::Star: return "*";
    case ExprKind::Neg: return "-" + format_expr(e.args[0]);
    case ExprKind::Abs: return "abs(" + format_expr(e.args[0]) + ")";
    case ExprKind::Add: return bin("+");
    case ExprKind::Sub: return bin("-");
    case ExprKind::Mul: return bin("*");
    case ExprKind::Div: return bin("/");
    case ExprKind::Call: {
      std::string s = e.text + "(";
      for (std::size_t i = 0; i < e.args.size(); ++i) s += (i ? ", " : "") + format_expr(e.args[i]);
      return s + ")";
    }
  }
  return "?";
}

}  // namespace fragdb::sql
