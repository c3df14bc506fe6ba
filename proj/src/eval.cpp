#include "pgcl/eval.hpp"

#include "pgcl/errors.hpp"

namespace pgcl {

namespace {

Rational power(const Rational& base, const Rational& exponent) {
  if (!is_integer(exponent)) {
    if (base == 1) return 1;
    throw EvalError("non-integer exponent " + to_string(exponent) + " of base " + to_string(base));
  }
  if (base == 1) return 1;
  if (abs(exponent) > kMaxExponent) throw EvalError("exponent " + to_string(exponent) + " too large");
  long k = exponent.get_num().get_si();
  if (k < 0 && sgn(base) == 0) throw DivisionByZero();
  unsigned long m = static_cast<unsigned long>(k < 0 ? -k : k);
  mpz_class num;
  mpz_class den;
  mpz_pow_ui(num.get_mpz_t(), base.get_num().get_mpz_t(), m);
  mpz_pow_ui(den.get_mpz_t(), base.get_den().get_mpz_t(), m);
  Rational r = k < 0 ? Rational(den, num) : Rational(num, den);
  r.canonicalize();
  return r;
}

}  // namespace

Rational eval_arith(const Arith& e, const State& s) {
  switch (e->op) {
    case ArithOp::Lit:
      return e->value;
    case ArithOp::Var:
      return s.get(e->name);
    case ArithOp::Neg:
      return -eval_arith(e->lhs, s);
    case ArithOp::Add:
      return eval_arith(e->lhs, s) + eval_arith(e->rhs, s);
    case ArithOp::Sub:
      return eval_arith(e->lhs, s) - eval_arith(e->rhs, s);
    case ArithOp::Mul:
      return eval_arith(e->lhs, s) * eval_arith(e->rhs, s);
    case ArithOp::Div: {
      Rational d = eval_arith(e->rhs, s);
      if (sgn(d) == 0) throw DivisionByZero();
      return eval_arith(e->lhs, s) / d;
    }
    case ArithOp::Pow:
      return power(eval_arith(e->lhs, s), eval_arith(e->rhs, s));
    case ArithOp::Min: {
      Rational a = eval_arith(e->lhs, s);
      Rational b = eval_arith(e->rhs, s);
      return b < a ? b : a;
    }
    case ArithOp::Max: {
      Rational a = eval_arith(e->lhs, s);
      Rational b = eval_arith(e->rhs, s);
      return a < b ? b : a;
    }
    case ArithOp::Abs:
      return abs(eval_arith(e->lhs, s));
    case ArithOp::Floor: {
      Rational a = eval_arith(e->lhs, s);
      mpz_class f;
      mpz_fdiv_q(f.get_mpz_t(), a.get_num().get_mpz_t(), a.get_den().get_mpz_t());
      return Rational(f);
    }
  }
  throw Error("corrupt arithmetic expression");
}

Rational eval_constant(const Arith& e) {
  static const State empty;
  return eval_arith(e, empty);
}

bool eval_guard(const Guard& g, const State& s) {
  switch (g->op) {
    case GuardOp::True:
      return true;
    case GuardOp::False:
      return false;
    case GuardOp::Not:
      return !eval_guard(g->a, s);
    case GuardOp::And:
      return eval_guard(g->a, s) && eval_guard(g->b, s);
    case GuardOp::Or:
      return eval_guard(g->a, s) || eval_guard(g->b, s);
    case GuardOp::Cmp: {
      int c = cmp(eval_arith(g->lhs, s), eval_arith(g->rhs, s));
      switch (g->cmp) {
        case CmpOp::Lt: return c < 0;
        case CmpOp::Le: return c <= 0;
        case CmpOp::Eq: return c == 0;
        case CmpOp::Ne: return c != 0;
        case CmpOp::Ge: return c >= 0;
        case CmpOp::Gt: return c > 0;
      }
    }
  }
  throw Error("corrupt guard");
}

Implication guard_implies(const Guard& g1, const Guard& g2, const std::vector<State>& domain) {
  if (domain.empty()) throw DomainError("guard_implies needs a nonempty domain");
  for (const State& s : domain) {
    if (eval_guard(g1, s) && !eval_guard(g2, s)) return {false, s};
  }
  return {};
}

}  // namespace pgcl
