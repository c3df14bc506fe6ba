#include "pgcl/expectation.hpp"

#include <algorithm>

#include "pgcl/errors.hpp"
#include "pgcl/eval.hpp"
#include "pgcl/syntax.hpp"
#include "print_util.hpp"

namespace pgcl {

namespace ex {

namespace {
Expectation make(ExpOp op, Expectation a = nullptr, Expectation b = nullptr) {
  auto n = std::make_shared<ExpNode>();
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

bool is_const(const Expectation& e, long v) { return e->op == ExpOp::Const && e->value == ExtRat(v); }
}  // namespace

Expectation constant(const ExtRat& v) {
  auto n = std::make_shared<ExpNode>();
  n->op = ExpOp::Const;
  n->value = v;
  return n;
}

Expectation zero() {
  static const Expectation z = constant(ExtRat(0L));
  return z;
}

Expectation one() {
  static const Expectation o = constant(ExtRat(1L));
  return o;
}

Expectation infinity() {
  static const Expectation i = constant(ExtRat::infinity());
  return i;
}

Expectation term(Arith a) {
  if (a->op == ArithOp::Lit && sgn(a->value) >= 0) return constant(ExtRat(a->value));
  auto n = std::make_shared<ExpNode>();
  n->op = ExpOp::Term;
  n->term = std::move(a);
  return n;
}

Expectation var(std::string name) { return term(arith::var(std::move(name))); }

Expectation iverson(Guard g) {
  if (g->op == GuardOp::True) return one();
  if (g->op == GuardOp::False) return zero();
  auto n = std::make_shared<ExpNode>();
  n->op = ExpOp::Iverson;
  n->cond = std::move(g);
  return n;
}

Expectation add(Expectation a, Expectation b) {
  if (is_const(a, 0)) return b;
  if (is_const(b, 0)) return a;
  if (a->op == ExpOp::Const && b->op == ExpOp::Const) return constant(a->value + b->value);
  return make(ExpOp::Add, std::move(a), std::move(b));
}

Expectation mul(Expectation a, Expectation b) {
  if (is_const(a, 0) || is_const(b, 0)) return zero();
  if (is_const(a, 1)) return b;
  if (is_const(b, 1)) return a;
  if (a->op == ExpOp::Const && b->op == ExpOp::Const) return constant(a->value * b->value);
  return make(ExpOp::Mul, std::move(a), std::move(b));
}

Expectation scale(const Rational& factor, Expectation a) {
  if (sgn(factor) < 0) throw NegativeValue("scaling by negative factor " + to_string(factor));
  return mul(constant(ExtRat(factor)), std::move(a));
}

Expectation mul_iverson(Guard g, Expectation a) { return mul(iverson(std::move(g)), std::move(a)); }

Expectation min(Expectation a, Expectation b) { return make(ExpOp::Min, std::move(a), std::move(b)); }
Expectation max(Expectation a, Expectation b) { return make(ExpOp::Max, std::move(a), std::move(b)); }
Expectation monus(Expectation a, Expectation b) { return make(ExpOp::Monus, std::move(a), std::move(b)); }

Expectation pow(Expectation base, unsigned exponent) {
  Expectation r = one();
  for (unsigned i = 0; i < exponent; ++i) r = mul(r, base);
  return r;
}

}  // namespace ex

namespace {

// Factors that are cheap and cannot fail on their own: evaluated first in
// products so that a zero short-circuits the other factor.
bool guard_like(const Expectation& e) {
  switch (e->op) {
    case ExpOp::Const:
    case ExpOp::Iverson:
      return true;
    case ExpOp::Mul:
      return guard_like(e->a) && guard_like(e->b);
    default:
      return false;
  }
}

}  // namespace

ExtRat eval(const Expectation& f, const State& s) {
  switch (f->op) {
    case ExpOp::Const:
      return f->value;
    case ExpOp::Term: {
      Rational v = eval_arith(f->term, s);
      if (sgn(v) < 0) {
        throw NegativeValue("expectation term " + pretty_print(f->term) + " is " + to_string(v) + " at " + s.str());
      }
      return ExtRat(v);
    }
    case ExpOp::Iverson:
      return ExtRat(eval_guard(f->cond, s) ? 1L : 0L);
    case ExpOp::Add:
      return eval(f->a, s) + eval(f->b, s);
    case ExpOp::Mul: {
      bool swap = !guard_like(f->a) && guard_like(f->b);
      const Expectation& first = swap ? f->b : f->a;
      const Expectation& second = swap ? f->a : f->b;
      ExtRat x = eval(first, s);
      if (x.is_zero()) return x;
      return x * eval(second, s);
    }
    case ExpOp::Min:
      return min(eval(f->a, s), eval(f->b, s));
    case ExpOp::Max:
      return max(eval(f->a, s), eval(f->b, s));
    case ExpOp::Monus:
      return monus(eval(f->a, s), eval(f->b, s));
  }
  throw Error("corrupt expectation");
}

Rational eval_signed(const Expectation& f, const State& s) {
  switch (f->op) {
    case ExpOp::Const:
      if (f->value.is_infinite()) throw InfiniteReward("infinite constant in a signed evaluation at " + s.str());
      return f->value.value();
    case ExpOp::Term:
      return eval_arith(f->term, s);
    case ExpOp::Iverson:
      return eval_guard(f->cond, s) ? 1 : 0;
    case ExpOp::Add:
      return eval_signed(f->a, s) + eval_signed(f->b, s);
    case ExpOp::Mul: {
      bool swap = !guard_like(f->a) && guard_like(f->b);
      Rational x = eval_signed(swap ? f->b : f->a, s);
      if (sgn(x) == 0) return x;
      return x * eval_signed(swap ? f->a : f->b, s);
    }
    case ExpOp::Min:
      return std::min(eval_signed(f->a, s), eval_signed(f->b, s));
    case ExpOp::Max:
      return std::max(eval_signed(f->a, s), eval_signed(f->b, s));
    case ExpOp::Monus: {
      Rational d = eval_signed(f->a, s) - eval_signed(f->b, s);
      return sgn(d) > 0 ? d : Rational(0);
    }
  }
  throw Error("corrupt expectation");
}

Expectation subst(const Expectation& f, const std::string& x, const Arith& e) {
  switch (f->op) {
    case ExpOp::Const:
      return f;
    case ExpOp::Term: {
      Arith t = substitute(f->term, x, e);
      return t == f->term ? f : ex::term(t);
    }
    case ExpOp::Iverson: {
      Guard g = substitute(f->cond, x, e);
      return g == f->cond ? f : ex::iverson(g);
    }
    default: {
      Expectation a = subst(f->a, x, e);
      Expectation b = subst(f->b, x, e);
      if (a == f->a && b == f->b) return f;
      auto n = std::make_shared<ExpNode>(*f);
      n->a = std::move(a);
      n->b = std::move(b);
      return n;
    }
  }
}

bool equal(const Expectation& a, const Expectation& b) {
  if (a == b) return true;
  if (!a || !b || a->op != b->op) return false;
  switch (a->op) {
    case ExpOp::Const:
      return a->value == b->value;
    case ExpOp::Term:
      return equal(a->term, b->term);
    case ExpOp::Iverson:
      return equal(a->cond, b->cond);
    default:
      return equal(a->a, b->a) && equal(a->b, b->b);
  }
}

void collect_vars(const Expectation& f, std::vector<std::string>& out) {
  if (!f) return;
  if (f->op == ExpOp::Term) collect_vars(f->term, out);
  if (f->op == ExpOp::Iverson) collect_vars(f->cond, out);
  collect_vars(f->a, out);
  collect_vars(f->b, out);
}

namespace {

// context: 0 sum operand, 1 product operand
std::string print_exp(const Expectation& f, int context) {
  switch (f->op) {
    case ExpOp::Const: {
      if (f->value.is_infinite()) return "inf";
      const Rational& q = f->value.value();
      std::string s = to_string(q);
      return is_integer(q) ? s : "(" + s + ")";
    }
    case ExpOp::Term: {
      std::string s = pretty_print(f->term);
      int p = detail::precedence(f->term);
      bool parens = context == 0 ? p <= 1 : p < 4;
      return parens ? "(" + s + ")" : s;
    }
    case ExpOp::Iverson:
      return "[" + pretty_print(f->cond) + "]";
    case ExpOp::Add: {
      std::string s = print_exp(f->a, 0) + " + " + print_exp(f->b, 0);
      return context == 0 ? s : "(" + s + ")";
    }
    case ExpOp::Mul:
      return print_exp(f->a, 1) + " * " + print_exp(f->b, 1);
    case ExpOp::Min:
      return "min(" + print_exp(f->a, 0) + ", " + print_exp(f->b, 0) + ")";
    case ExpOp::Max:
      return "max(" + print_exp(f->a, 0) + ", " + print_exp(f->b, 0) + ")";
    case ExpOp::Monus:
      return "monus(" + print_exp(f->a, 0) + ", " + print_exp(f->b, 0) + ")";
  }
  return "?";
}

}  // namespace

std::string pretty_print(const Expectation& f) { return print_exp(f, 0); }

const char* order_name(Order o) {
  switch (o) {
    case Order::LEQ: return "LEQ";
    case Order::GEQ: return "GEQ";
    case Order::EQ: return "EQ";
    case Order::INCOMPARABLE: return "INCOMPARABLE";
  }
  return "?";
}

Comparison compare_pointwise(const Expectation& f, const Expectation& g, const std::vector<State>& domain) {
  if (domain.empty()) throw DomainError("compare_pointwise needs a nonempty domain");
  Comparison c;
  for (const State& s : domain) {
    ExtRat x;
    ExtRat y;
    try {
      x = eval(f, s);
      y = eval(g, s);
    } catch (const EvalError& e) {
      throw EvalError(std::string(e.what()) + " (at state " + s.str() + ")");
    }
    if (y < x && !c.not_leq) c.not_leq = s;
    if (x < y && !c.not_geq) c.not_geq = s;
  }
  if (c.not_leq && c.not_geq) {
    c.order = Order::INCOMPARABLE;
  } else if (c.not_leq) {
    c.order = Order::GEQ;
  } else if (c.not_geq) {
    c.order = Order::LEQ;
  } else {
    c.order = Order::EQ;
  }
  return c;
}

}  // namespace pgcl
