#include <cctype>
#include <string>
#include <utility>
#include <vector>

#include "pgcl/errors.hpp"
#include "pgcl/eval.hpp"
#include "pgcl/expectation.hpp"
#include "pgcl/syntax.hpp"

namespace pgcl {

namespace {

enum class Tok { Ident, Number, Sym, End };

struct Token {
  Tok kind;
  std::string text;
  std::size_t line;
  std::size_t col;
};

// Multi-byte spellings are mapped to their ASCII equivalents.
struct Alias {
  const char* utf8;
  const char* ascii;
};

constexpr Alias kAliases[] = {
    {"⊕", "(+)"}, {"≤", "<="}, {"≥", ">="}, {"≠", "!="}, {"∧", "&"}, {"∨", "|"},
    {"¬", "!"},   {"·", "*"},  {"∞", "inf"}, {"⊖", "monus"},
};

constexpr const char* kSymbols[] = {"(+)", ":=", ":~", "<=", ">=", "!=", "==", "&&", "||", ";", "{", "}",
                                    "[",   "]",  "(",  ")",  ",",  ":",  "+",  "-",  "*",  "/", "^", "<",
                                    ">",   "=",  "!",  "&",  "|"};

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0;
  std::size_t line = 1;
  std::size_t col = 1;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else if ((static_cast<unsigned char>(src[i]) & 0xC0) != 0x80) {
        ++col;
      }
      ++i;
    }
  };
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '#' || (c == '/' && i + 1 < src.size() && src[i + 1] == '/')) {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    std::size_t l = line;
    std::size_t cl = col;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      out.push_back({Tok::Ident, std::string(src.substr(i, j - i)), l, cl});
      advance(j - i);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      if (j + 1 < src.size() && src[j] == '.' && std::isdigit(static_cast<unsigned char>(src[j + 1]))) {
        ++j;
        while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      }
      out.push_back({Tok::Number, std::string(src.substr(i, j - i)), l, cl});
      advance(j - i);
      continue;
    }
    bool matched = false;
    for (const Alias& a : kAliases) {
      std::string_view u(a.utf8);
      if (src.substr(i, u.size()) == u) {
        std::string ascii(a.ascii);
        Tok kind = std::isalpha(static_cast<unsigned char>(ascii[0])) ? Tok::Ident : Tok::Sym;
        out.push_back({kind, ascii, l, cl});
        advance(u.size());
        matched = true;
        break;
      }
    }
    if (matched) continue;
    for (const char* sym : kSymbols) {
      std::string_view s(sym);
      if (src.substr(i, s.size()) == s) {
        out.push_back({Tok::Sym, std::string(s), l, cl});
        advance(s.size());
        matched = true;
        break;
      }
    }
    if (!matched) throw SyntaxError("unexpected character '" + std::string(1, c) + "'", l, cl);
  }
  out.push_back({Tok::End, "", line, col});
  return out;
}

bool is_keyword(const std::string& s) {
  static const char* kw[] = {"skip", "diverge", "if",  "else", "while", "dist", "uniform", "true",  "false",
                             "not",  "and",     "or",  "min",  "max",   "abs",  "floor",   "inf",   "monus"};
  for (const char* k : kw) {
    if (s == k) return true;
  }
  return false;
}

bool is_cmp(const Token& t) {
  if (t.kind != Tok::Sym) return false;
  const std::string& s = t.text;
  return s == "<" || s == "<=" || s == "=" || s == "==" || s == "!=" || s == ">=" || s == ">";
}

Arith fold_neg(Arith a) {
  if (a->op == ArithOp::Lit) return arith::lit(-a->value);
  return arith::neg(std::move(a));
}

Arith fold_div(Arith a, Arith b) {
  if (a->op == ArithOp::Lit && b->op == ArithOp::Lit && sgn(b->value) != 0) {
    return arith::lit(a->value / b->value);
  }
  return arith::div(std::move(a), std::move(b));
}

// Intermediate result of expectation parsing: either still purely
// arithmetic, or already an expectation.
struct Mixed {
  Arith a;
  Expectation e;
  bool is_arith() const { return a != nullptr; }
  Expectation as_exp() const { return a ? ex::term(a) : e; }
};

class Parser {
 public:
  explicit Parser(std::string_view src) : toks_(lex(src)) {}

  Program program_eof() {
    Program p = program();
    expect_end();
    return p;
  }

  Arith arith_eof() {
    Arith a = aexpr();
    expect_end();
    return a;
  }

  Guard guard_eof() {
    Guard g = guard();
    expect_end();
    return g;
  }

  Expectation exp_eof() {
    Mixed m = eexpr();
    expect_end();
    return m.as_exp();
  }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;

  const Token& peek(std::size_t k = 0) const {
    std::size_t i = pos_ + k;
    return i < toks_.size() ? toks_[i] : toks_.back();
  }

  bool at_sym(const char* s) const { return peek().kind == Tok::Sym && peek().text == s; }
  bool at_word(const char* s) const { return peek().kind == Tok::Ident && peek().text == s; }

  [[noreturn]] void fail(const std::string& expected) {
    const Token& t = peek();
    std::string found = t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
    throw SyntaxError("expected " + expected + ", found " + found, t.line, t.col);
  }

  void expect_sym(const char* s) {
    if (!at_sym(s)) fail(std::string("'") + s + "'");
    ++pos_;
  }

  void expect_word(const char* s) {
    if (!at_word(s)) fail(std::string("'") + s + "'");
    ++pos_;
  }

  void expect_end() {
    if (peek().kind != Tok::End) fail("end of input");
  }

  std::string ident() {
    const Token& t = peek();
    if (t.kind != Tok::Ident || is_keyword(t.text)) fail("identifier");
    ++pos_;
    return t.text;
  }

  // ---- arithmetic

  Arith aexpr() {
    Arith a = aterm();
    while (at_sym("+") || at_sym("-")) {
      bool plus = peek().text == "+";
      ++pos_;
      Arith b = aterm();
      a = plus ? arith::add(a, b) : arith::sub(a, b);
    }
    return a;
  }

  Arith aterm() {
    Arith a = aunary();
    while (at_sym("*") || at_sym("/")) {
      bool times = peek().text == "*";
      ++pos_;
      Arith b = aunary();
      a = times ? arith::mul(a, b) : fold_div(a, b);
    }
    return a;
  }

  Arith aunary() {
    if (at_sym("-")) {
      ++pos_;
      return fold_neg(aunary());
    }
    return apow();
  }

  Arith apow() {
    Arith base = aatom();
    if (at_sym("^")) {
      ++pos_;
      return arith::pow(base, aunary());
    }
    return base;
  }

  Arith aatom() {
    const Token& t = peek();
    if (t.kind == Tok::Number) {
      ++pos_;
      return arith::lit(parse_rational(t.text));
    }
    if (t.kind == Tok::Ident) {
      if (t.text == "min" || t.text == "max") {
        bool is_min = t.text == "min";
        ++pos_;
        expect_sym("(");
        Arith a = aexpr();
        expect_sym(",");
        Arith b = aexpr();
        expect_sym(")");
        return is_min ? arith::min(a, b) : arith::max(a, b);
      }
      if (t.text == "abs" || t.text == "floor") {
        bool is_abs = t.text == "abs";
        ++pos_;
        expect_sym("(");
        Arith a = aexpr();
        expect_sym(")");
        return is_abs ? arith::abs(a) : arith::floor(a);
      }
      return arith::var(ident());
    }
    if (at_sym("(")) {
      ++pos_;
      Arith a = aexpr();
      expect_sym(")");
      return a;
    }
    fail("arithmetic expression");
  }

  Rational constant() {
    Arith a = aexpr();
    if (!is_constant(a)) fail("constant");
    return eval_constant(a);
  }

  // ---- guards

  Guard guard() {
    Guard g = gand();
    while (at_sym("|") || at_sym("||") || at_word("or")) {
      ++pos_;
      g = guard::disj(g, gand());
    }
    return g;
  }

  Guard gand() {
    Guard g = gnot();
    while (at_sym("&") || at_sym("&&") || at_word("and")) {
      ++pos_;
      g = guard::conj(g, gnot());
    }
    return g;
  }

  Guard gnot() {
    if (at_sym("!") || at_word("not")) {
      ++pos_;
      return guard::negate(gnot());
    }
    return gatom();
  }

  Guard gatom() {
    if (at_word("true")) {
      ++pos_;
      return guard::truth();
    }
    if (at_word("false")) {
      ++pos_;
      return guard::falsity();
    }
    // Try a comparison first; a parenthesised guard is the fallback.
    std::size_t save = pos_;
    try {
      return comparison();
    } catch (const SyntaxError& first) {
      if (!at_sym_at(save, "(")) throw;
      pos_ = save + 1;
      try {
        Guard g = guard();
        expect_sym(")");
        return g;
      } catch (const SyntaxError& second) {
        // Report whichever attempt got further.
        if (std::pair(first.line(), first.column()) > std::pair(second.line(), second.column())) throw first;
        throw;
      }
    }
  }

  bool at_sym_at(std::size_t i, const char* s) const {
    return i < toks_.size() && toks_[i].kind == Tok::Sym && toks_[i].text == s;
  }

  Guard comparison() {
    Arith lhs = aexpr();
    if (!is_cmp(peek())) fail("comparison operator");
    Guard g;
    while (is_cmp(peek())) {
      CmpOp op = parse_cmp(peek().text);
      ++pos_;
      Arith rhs = aexpr();
      Guard c = guard::cmp(lhs, op, rhs);
      g = g ? guard::conj(g, c) : c;
      lhs = rhs;
    }
    return g;
  }

  // ---- programs

  Program program() {
    std::vector<Program> parts;
    parts.push_back(statement());
    while (at_sym(";")) {
      ++pos_;
      if (at_sym("}") || peek().kind == Tok::End) break;
      parts.push_back(statement());
    }
    return prog::seq(std::move(parts));
  }

  Program block() {
    expect_sym("{");
    if (at_sym("}")) fail("statement");
    Program p = program();
    expect_sym("}");
    return p;
  }

  Program statement() {
    if (at_word("skip")) {
      ++pos_;
      return prog::skip();
    }
    if (at_word("diverge")) {
      ++pos_;
      return prog::diverge();
    }
    if (at_word("if")) {
      ++pos_;
      expect_sym("(");
      Guard g = guard();
      expect_sym(")");
      Program then_branch = block();
      Program else_branch = prog::skip();
      if (at_word("else")) {
        ++pos_;
        else_branch = at_word("if") ? statement() : block();
      }
      return prog::ite(g, then_branch, else_branch);
    }
    if (at_word("while")) {
      ++pos_;
      expect_sym("(");
      Guard g = guard();
      expect_sym(")");
      return prog::loop(g, block());
    }
    if (at_sym("{")) {
      Program first = block();
      if (at_sym("[")) {
        const Token& open = peek();
        ++pos_;
        Arith p = aexpr();
        expect_sym("]");
        Program second = block();
        try {
          return prog::choice(first, p, second);
        } catch (const SyntaxError&) {
          throw;
        } catch (const Error& e) {
          throw SyntaxError(e.what(), open.line, open.col);
        }
      }
      if (at_sym("(+)")) {
        std::vector<Program> branches{first};
        while (at_sym("(+)")) {
          ++pos_;
          branches.push_back(block());
        }
        return prog::uniform(std::move(branches));
      }
      return first;
    }
    if (peek().kind == Tok::Ident && !is_keyword(peek().text)) {
      std::string x = ident();
      if (at_sym(":=")) {
        ++pos_;
        return prog::assign(x, aexpr());
      }
      if (at_sym(":~")) {
        ++pos_;
        const Token& start = peek();
        Distribution d = distribution();
        try {
          return prog::random_assign(x, d);
        } catch (const Error& e) {
          throw SyntaxError(e.what(), start.line, start.col);
        }
      }
      fail("':=' or ':~'");
    }
    fail("statement");
  }

  Distribution distribution() {
    Distribution d;
    if (at_word("uniform")) {
      ++pos_;
      expect_sym("(");
      d.continuous = true;
      d.lo = constant();
      expect_sym(",");
      d.hi = constant();
      expect_sym(")");
      return d;
    }
    expect_word("dist");
    expect_sym("{");
    do {
      if (!d.outcomes.empty()) ++pos_;
      Rational w = constant();
      expect_sym(":");
      d.outcomes.emplace_back(w, aexpr());
    } while (at_sym(","));
    expect_sym("}");
    return d;
  }

  // ---- expectations

  Mixed eexpr() {
    Mixed m = eterm();
    for (;;) {
      if (at_sym("+")) {
        ++pos_;
        Mixed r = eterm();
        if (m.is_arith() && r.is_arith()) {
          m = {arith::add(m.a, r.a), nullptr};
        } else {
          m = {nullptr, ex::add(m.as_exp(), r.as_exp())};
        }
      } else if (at_sym("-")) {
        const Token& t = peek();
        ++pos_;
        Mixed r = eterm();
        if (!m.is_arith() || !r.is_arith()) {
          throw SyntaxError("subtraction involving an expectation; use monus", t.line, t.col);
        }
        m = {arith::sub(m.a, r.a), nullptr};
      } else if (at_word("monus")) {
        ++pos_;
        Mixed r = eterm();
        m = {nullptr, ex::monus(m.as_exp(), r.as_exp())};
      } else {
        return m;
      }
    }
  }

  bool starts_factor() const {
    const Token& t = peek();
    if (t.kind == Tok::Number) return true;
    if (t.kind == Tok::Ident) return t.text != "monus" && t.text != "and" && t.text != "or";
    return t.kind == Tok::Sym && (t.text == "[" || t.text == "(");
  }

  Mixed eterm() {
    Mixed m = eunary();
    for (;;) {
      if (at_sym("*")) {
        ++pos_;
        m = times(m, eunary());
      } else if (at_sym("/")) {
        const Token& t = peek();
        ++pos_;
        Mixed r = eunary();
        if (!r.is_arith()) throw SyntaxError("division by an expectation", t.line, t.col);
        if (m.is_arith()) {
          m = {fold_div(m.a, r.a), nullptr};
        } else {
          m = {nullptr, ex::mul(m.e, ex::term(fold_div(arith::lit(1), r.a)))};
        }
      } else if (starts_factor()) {
        m = times(m, eunary());
      } else {
        return m;
      }
    }
  }

  static Mixed times(const Mixed& l, const Mixed& r) {
    if (l.is_arith() && r.is_arith()) return {arith::mul(l.a, r.a), nullptr};
    return {nullptr, ex::mul(l.as_exp(), r.as_exp())};
  }

  Mixed eunary() {
    if (at_sym("-")) {
      const Token& t = peek();
      ++pos_;
      Mixed m = eunary();
      if (!m.is_arith()) throw SyntaxError("negated expectation", t.line, t.col);
      return {fold_neg(m.a), nullptr};
    }
    Mixed base = eatom();
    if (at_sym("^")) {
      const Token& t = peek();
      ++pos_;
      Mixed exponent = eunary();
      if (!exponent.is_arith()) throw SyntaxError("expectation used as exponent", t.line, t.col);
      if (base.is_arith()) return {arith::pow(base.a, exponent.a), nullptr};
      if (!is_constant(exponent.a)) throw SyntaxError("variable exponent of an expectation", t.line, t.col);
      Rational k = eval_constant(exponent.a);
      if (!is_integer(k) || sgn(k) < 0 || k > 64) {
        throw SyntaxError("exponent of an expectation must be a small nonnegative integer", t.line, t.col);
      }
      return {nullptr, ex::pow(base.e, static_cast<unsigned>(k.get_num().get_ui()))};
    }
    return base;
  }

  Mixed eatom() {
    const Token& t = peek();
    if (t.kind == Tok::Number) {
      ++pos_;
      return {arith::lit(parse_rational(t.text)), nullptr};
    }
    if (at_sym("[")) {
      ++pos_;
      Guard g = guard();
      expect_sym("]");
      return {nullptr, ex::iverson(g)};
    }
    if (at_sym("(")) {
      ++pos_;
      Mixed m = eexpr();
      expect_sym(")");
      return m;
    }
    if (t.kind == Tok::Ident) {
      if (t.text == "inf" || t.text == "infinity") {
        ++pos_;
        return {nullptr, ex::infinity()};
      }
      if (t.text == "min" || t.text == "max" || t.text == "monus") {
        std::string f = t.text;
        ++pos_;
        expect_sym("(");
        Mixed a = eexpr();
        expect_sym(",");
        Mixed b = eexpr();
        expect_sym(")");
        if (f != "monus" && a.is_arith() && b.is_arith()) {
          return {f == "min" ? arith::min(a.a, b.a) : arith::max(a.a, b.a), nullptr};
        }
        if (f == "min") return {nullptr, ex::min(a.as_exp(), b.as_exp())};
        if (f == "max") return {nullptr, ex::max(a.as_exp(), b.as_exp())};
        return {nullptr, ex::monus(a.as_exp(), b.as_exp())};
      }
      if (t.text == "abs" || t.text == "floor") {
        bool is_abs = t.text == "abs";
        ++pos_;
        expect_sym("(");
        Mixed a = eexpr();
        expect_sym(")");
        if (!a.is_arith()) fail("arithmetic argument");
        return {is_abs ? arith::abs(a.a) : arith::floor(a.a), nullptr};
      }
      return {arith::var(ident()), nullptr};
    }
    fail("expectation");
  }
};

}  // namespace

Program parse_program(std::string_view text) { return Parser(text).program_eof(); }
Arith parse_arith(std::string_view text) { return Parser(text).arith_eof(); }
Guard parse_guard(std::string_view text) { return Parser(text).guard_eof(); }
Expectation parse_expectation(std::string_view text) { return Parser(text).exp_eof(); }

}  // namespace pgcl
