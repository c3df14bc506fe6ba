#include "pgcl/interval.hpp"

#include <algorithm>
#include <vector>

#include "pgcl/eval.hpp"

namespace pgcl {

namespace {

// Extended endpoint: inf is -1, 0 or +1.
struct End {
  int inf = 0;
  Rational v = 0;
};

End lo_end(const Interval& a) { return a.lo ? End{0, *a.lo} : End{-1, 0}; }
End hi_end(const Interval& a) { return a.hi ? End{0, *a.hi} : End{1, 0}; }

int sign(const End& e) { return e.inf != 0 ? e.inf : sgn(e.v); }

End times(const End& a, const End& b) {
  if ((a.inf == 0 && sgn(a.v) == 0) || (b.inf == 0 && sgn(b.v) == 0)) return {0, 0};
  if (a.inf != 0 || b.inf != 0) return {sign(a) * sign(b), 0};
  return {0, a.v * b.v};
}

bool less(const End& a, const End& b) {
  if (a.inf != b.inf) return a.inf < b.inf;
  return a.inf == 0 && a.v < b.v;
}

Interval from_ends(const End& lo, const End& hi) {
  Interval r;
  if (lo.inf == 0) r.lo = lo.v;
  if (hi.inf == 0) r.hi = hi.v;
  return r;
}

Interval plus(const Interval& a, const Interval& b) {
  Interval r;
  if (a.lo && b.lo) r.lo = *a.lo + *b.lo;
  if (a.hi && b.hi) r.hi = *a.hi + *b.hi;
  return r;
}

Interval negated(const Interval& a) {
  Interval r;
  if (a.hi) r.lo = -*a.hi;
  if (a.lo) r.hi = -*a.lo;
  return r;
}

Interval times(const Interval& a, const Interval& b) {
  End c[4] = {times(lo_end(a), lo_end(b)), times(lo_end(a), hi_end(b)), times(hi_end(a), lo_end(b)),
              times(hi_end(a), hi_end(b))};
  End lo = c[0];
  End hi = c[0];
  for (const End& e : c) {
    if (less(e, lo)) lo = e;
    if (less(hi, e)) hi = e;
  }
  return from_ends(lo, hi);
}

Interval reciprocal(const Interval& b) {
  bool positive = b.lo && (sgn(*b.lo) > 0 || (sgn(*b.lo) == 0 && b.lo_strict));
  bool negative = b.hi && (sgn(*b.hi) < 0 || (sgn(*b.hi) == 0 && b.hi_strict));
  Interval r;
  if (positive) {
    r.lo = b.hi ? Rational(1 / *b.hi) : Rational(0);
    if (sgn(*b.lo) > 0) r.hi = 1 / *b.lo;
  } else if (negative) {
    r.hi = b.lo ? Rational(1 / *b.lo) : Rational(0);
    if (sgn(*b.hi) < 0) r.lo = 1 / *b.hi;
  }
  return r;
}

Rational qpow(const Rational& q, unsigned long k) {
  mpz_class num;
  mpz_class den;
  mpz_pow_ui(num.get_mpz_t(), q.get_num().get_mpz_t(), k);
  mpz_pow_ui(den.get_mpz_t(), q.get_den().get_mpz_t(), k);
  Rational r(num, den);
  r.canonicalize();
  return r;
}

Interval absolute(const Interval& a) {
  if (a.lo && sgn(*a.lo) >= 0) return {a.lo, a.hi};
  if (a.hi && sgn(*a.hi) <= 0) return negated({a.lo, a.hi});
  Interval r;
  r.lo = Rational(0);
  if (a.lo && a.hi) r.hi = std::max(Rational(-*a.lo), *a.hi);
  return r;
}

Interval power(const Interval& base, const Interval& exponent) {
  if (exponent.lo && exponent.hi && *exponent.lo == *exponent.hi && is_integer(*exponent.lo) &&
      abs(*exponent.lo) <= kMaxExponent) {
    long k = exponent.lo->get_num().get_si();
    if (k == 0) return Interval::point(1);
    if (k < 0) return reciprocal(power(base, Interval::point(-k)));
    unsigned long m = static_cast<unsigned long>(k);
    if (m % 2 == 1) {
      Interval r;
      if (base.lo) r.lo = qpow(*base.lo, m);
      if (base.hi) r.hi = qpow(*base.hi, m);
      return r;
    }
    Interval a = absolute(base);
    Interval r;
    r.lo = qpow(*a.lo, m);
    if (a.hi) r.hi = qpow(*a.hi, m);
    return r;
  }
  // Variable exponent: only a base in [0, 1] with a nonnegative exponent
  // stays bounded.
  if (base.lo && base.hi && sgn(*base.lo) >= 0 && *base.hi <= 1 && exponent.lo && sgn(*exponent.lo) >= 0) {
    return {Rational(0), Rational(1)};
  }
  return Interval::all();
}

Interval lower_of(const Interval& a, const Interval& b) {
  Interval r;
  if (a.lo && b.lo) r.lo = std::min(*a.lo, *b.lo);
  if (a.hi && b.hi) r.hi = std::min(*a.hi, *b.hi);
  else if (a.hi) r.hi = a.hi;
  else if (b.hi) r.hi = b.hi;
  return r;
}

Interval upper_of(const Interval& a, const Interval& b) {
  Interval r;
  if (a.hi && b.hi) r.hi = std::max(*a.hi, *b.hi);
  if (a.lo && b.lo) r.lo = std::max(*a.lo, *b.lo);
  else if (a.lo) r.lo = a.lo;
  else if (b.lo) r.lo = b.lo;
  return r;
}

Rational floor_of(const Rational& q) {
  mpz_class f;
  mpz_fdiv_q(f.get_mpz_t(), q.get_num().get_mpz_t(), q.get_den().get_mpz_t());
  return Rational(f);
}

// a . x + c with rational coefficients.
struct Linear {
  std::map<std::string, Rational> coef;
  Rational c = 0;
};

std::optional<Linear> linear(const Arith& e) {
  switch (e->op) {
    case ArithOp::Lit:
      return Linear{{}, e->value};
    case ArithOp::Var: {
      Linear l;
      l.coef[e->name] = 1;
      return l;
    }
    case ArithOp::Neg: {
      auto a = linear(e->lhs);
      if (!a) return std::nullopt;
      for (auto& [x, k] : a->coef) k = -k;
      a->c = -a->c;
      return a;
    }
    case ArithOp::Add:
    case ArithOp::Sub: {
      auto a = linear(e->lhs);
      auto b = linear(e->rhs);
      if (!a || !b) return std::nullopt;
      Rational s = e->op == ArithOp::Add ? 1 : -1;
      for (const auto& [x, k] : b->coef) a->coef[x] += s * k;
      a->c += s * b->c;
      return a;
    }
    case ArithOp::Mul:
    case ArithOp::Div: {
      auto a = linear(e->lhs);
      auto b = linear(e->rhs);
      if (!a || !b) return std::nullopt;
      bool a_const = std::all_of(a->coef.begin(), a->coef.end(), [](const auto& p) { return sgn(p.second) == 0; });
      bool b_const = std::all_of(b->coef.begin(), b->coef.end(), [](const auto& p) { return sgn(p.second) == 0; });
      if (e->op == ArithOp::Div) {
        if (!b_const || sgn(b->c) == 0) return std::nullopt;
        for (auto& [x, k] : a->coef) k /= b->c;
        a->c /= b->c;
        return a;
      }
      if (b_const) {
        for (auto& [x, k] : a->coef) k *= b->c;
        a->c *= b->c;
        return a;
      }
      if (a_const) {
        for (auto& [x, k] : b->coef) k *= a->c;
        b->c *= a->c;
        return b;
      }
      return std::nullopt;
    }
    default:
      return std::nullopt;
  }
}

CmpOp flip(CmpOp op) {
  switch (op) {
    case CmpOp::Lt:
      return CmpOp::Gt;
    case CmpOp::Le:
      return CmpOp::Ge;
    case CmpOp::Gt:
      return CmpOp::Lt;
    case CmpOp::Ge:
      return CmpOp::Le;
    default:
      return op;
  }
}

CmpOp negate_op(CmpOp op) {
  switch (op) {
    case CmpOp::Lt:
      return CmpOp::Ge;
    case CmpOp::Le:
      return CmpOp::Gt;
    case CmpOp::Gt:
      return CmpOp::Le;
    case CmpOp::Ge:
      return CmpOp::Lt;
    case CmpOp::Eq:
      return CmpOp::Ne;
    case CmpOp::Ne:
      return CmpOp::Eq;
  }
  return op;
}

bool holds(const Rational& v, CmpOp op) {
  switch (op) {
    case CmpOp::Lt:
      return sgn(v) < 0;
    case CmpOp::Le:
      return sgn(v) <= 0;
    case CmpOp::Gt:
      return sgn(v) > 0;
    case CmpOp::Ge:
      return sgn(v) >= 0;
    case CmpOp::Eq:
      return sgn(v) == 0;
    case CmpOp::Ne:
      return sgn(v) != 0;
  }
  return true;
}

void refine_cmp(Box& box, const Arith& lhs, CmpOp op, const Arith& rhs) {
  auto l = linear(arith::sub(lhs, rhs));
  if (!l) return;
  std::string var;
  Rational a = 0;
  for (const auto& [x, k] : l->coef) {
    if (sgn(k) == 0) continue;
    if (!var.empty()) return;
    var = x;
    a = k;
  }
  if (var.empty()) {
    if (!holds(l->c, op)) box.mark_empty();
    return;
  }
  // a*x + c op 0  <=>  x op' -c/a
  Rational bound = -l->c / a;
  if (sgn(a) < 0) op = flip(op);
  Interval r;
  switch (op) {
    case CmpOp::Lt:
      r.hi = bound;
      r.hi_strict = true;
      break;
    case CmpOp::Le:
      r.hi = bound;
      break;
    case CmpOp::Gt:
      r.lo = bound;
      r.lo_strict = true;
      break;
    case CmpOp::Ge:
      r.lo = bound;
      break;
    case CmpOp::Eq:
      r = Interval::point(bound);
      break;
    case CmpOp::Ne:
      return;
  }
  box.restrict(var, r);
}

void refine_into(Box& box, const Guard& g, bool positive) {
  switch (g->op) {
    case GuardOp::True:
      if (!positive) box.mark_empty();
      return;
    case GuardOp::False:
      if (positive) box.mark_empty();
      return;
    case GuardOp::Not:
      refine_into(box, g->a, !positive);
      return;
    case GuardOp::And:
      if (positive) {
        refine_into(box, g->a, true);
        refine_into(box, g->b, true);
      }
      return;
    case GuardOp::Or:
      if (!positive) {
        refine_into(box, g->a, false);
        refine_into(box, g->b, false);
      }
      return;
    case GuardOp::Cmp:
      refine_cmp(box, g->lhs, positive ? g->cmp : negate_op(g->cmp), g->rhs);
      return;
  }
}

void flatten(const Expectation& f, ExpOp op, std::vector<Expectation>& out) {
  if (f->op == op) {
    flatten(f->a, op, out);
    flatten(f->b, op, out);
  } else {
    out.push_back(f);
  }
}

// Region where a summand can be nonzero: the box narrowed by its top-level
// Iverson factors.
Box region(const Expectation& f, const Box& box) {
  std::vector<Expectation> factors;
  flatten(f, ExpOp::Mul, factors);
  Box r = box;
  for (const Expectation& x : factors) {
    if (x->op == ExpOp::Iverson) r = refine(r, x->cond);
  }
  return r;
}

ExpRange product(const ExpRange& a, const ExpRange& b) {
  ExpRange r;
  r.lo = a.lo * b.lo;
  if ((a.hi && sgn(*a.hi) == 0) || (b.hi && sgn(*b.hi) == 0)) {
    r.hi = Rational(0);
  } else if (a.hi && b.hi) {
    r.hi = *a.hi * *b.hi;
  }
  return r;
}

}  // namespace

bool Interval::empty() const {
  if (!lo || !hi) return false;
  if (*lo > *hi) return true;
  return *lo == *hi && (lo_strict || hi_strict);
}

std::string Interval::str() const {
  std::string s = lo ? (lo_strict ? "(" : "[") + to_string(*lo) : std::string("(-inf");
  s += ", ";
  s += hi ? to_string(*hi) + (hi_strict ? ")" : "]") : std::string("inf)");
  return s;
}

Interval meet(const Interval& a, const Interval& b) {
  Interval r = a;
  if (b.lo && (!r.lo || *b.lo > *r.lo || (*b.lo == *r.lo && b.lo_strict))) {
    r.lo = b.lo;
    r.lo_strict = b.lo_strict;
  }
  if (b.hi && (!r.hi || *b.hi < *r.hi || (*b.hi == *r.hi && b.hi_strict))) {
    r.hi = b.hi;
    r.hi_strict = b.hi_strict;
  }
  return r;
}

bool disjoint(const Interval& a, const Interval& b) { return meet(a, b).empty(); }

Interval Box::get(const std::string& var) const {
  auto it = ranges_.find(var);
  return it == ranges_.end() ? Interval::all() : it->second;
}

void Box::restrict(const std::string& var, const Interval& range) {
  Interval& cur = ranges_[var];
  cur = meet(cur, range);
}

bool Box::empty() const {
  if (infeasible_) return true;
  return std::any_of(ranges_.begin(), ranges_.end(), [](const auto& p) { return p.second.empty(); });
}

bool Box::disjoint(const Box& other) const {
  if (empty() || other.empty()) return true;
  for (const auto& [x, r] : ranges_) {
    if (pgcl::disjoint(r, other.get(x))) return true;
  }
  return false;
}

Interval eval_interval(const Arith& e, const Box& box) {
  switch (e->op) {
    case ArithOp::Lit:
      return Interval::point(e->value);
    case ArithOp::Var: {
      Interval r = box.get(e->name);
      r.lo_strict = r.hi_strict = false;
      return r;
    }
    case ArithOp::Neg:
      return negated(eval_interval(e->lhs, box));
    case ArithOp::Add:
      return plus(eval_interval(e->lhs, box), eval_interval(e->rhs, box));
    case ArithOp::Sub:
      return plus(eval_interval(e->lhs, box), negated(eval_interval(e->rhs, box)));
    case ArithOp::Mul:
      if (equal(e->lhs, e->rhs)) return power(eval_interval(e->lhs, box), Interval::point(2));
      return times(eval_interval(e->lhs, box), eval_interval(e->rhs, box));
    case ArithOp::Div:
      return times(eval_interval(e->lhs, box), reciprocal(eval_interval(e->rhs, box)));
    case ArithOp::Pow:
      return power(eval_interval(e->lhs, box), eval_interval(e->rhs, box));
    case ArithOp::Min:
      return lower_of(eval_interval(e->lhs, box), eval_interval(e->rhs, box));
    case ArithOp::Max:
      return upper_of(eval_interval(e->lhs, box), eval_interval(e->rhs, box));
    case ArithOp::Abs:
      return absolute(eval_interval(e->lhs, box));
    case ArithOp::Floor: {
      Interval a = eval_interval(e->lhs, box);
      Interval r;
      if (a.lo) r.lo = floor_of(*a.lo);
      if (a.hi) r.hi = floor_of(*a.hi);
      return r;
    }
  }
  return Interval::all();
}

Box refine(const Box& box, const Guard& g) {
  Box r = box;
  refine_into(r, g, true);
  return r;
}

ExpRange eval_range(const Expectation& f, const Box& box) {
  if (box.empty()) return {Rational(0), Rational(0)};
  switch (f->op) {
    case ExpOp::Const:
      if (f->value.is_infinite()) return {Rational(0), std::nullopt};
      return {f->value.value(), f->value.value()};
    case ExpOp::Term: {
      // The leaf is nonnegative wherever it is evaluated.
      Interval a = eval_interval(f->term, box);
      ExpRange r;
      r.lo = a.lo && sgn(*a.lo) > 0 ? *a.lo : Rational(0);
      if (a.hi) r.hi = sgn(*a.hi) > 0 ? *a.hi : Rational(0);
      return r;
    }
    case ExpOp::Iverson:
      if (refine(box, f->cond).empty()) return {Rational(0), Rational(0)};
      // refine over-approximates, so an empty complement means g holds on the whole box.
      if (refine(box, guard::negate(f->cond)).empty()) return {Rational(1), Rational(1)};
      return {Rational(0), Rational(1)};
    case ExpOp::Add: {
      std::vector<Expectation> parts;
      flatten(f, ExpOp::Add, parts);
      std::vector<Box> regions;
      std::vector<ExpRange> ranges;
      for (const Expectation& p : parts) {
        regions.push_back(region(p, box));
        ranges.push_back(eval_range(p, box));
      }
      bool separate = true;
      for (std::size_t i = 0; i < regions.size() && separate; ++i) {
        for (std::size_t j = i + 1; j < regions.size() && separate; ++j) separate = regions[i].disjoint(regions[j]);
      }
      ExpRange r;
      r.hi = Rational(0);
      for (const ExpRange& x : ranges) {
        if (!separate) r.lo += x.lo;
        if (!x.hi) {
          r.hi.reset();
        } else if (r.hi) {
          r.hi = separate ? std::max(*r.hi, *x.hi) : Rational(*r.hi + *x.hi);
        }
      }
      if (!r.hi) {
        for (const ExpRange& x : ranges) {
          if (!x.hi) return {r.lo, std::nullopt};
        }
      }
      return r;
    }
    case ExpOp::Mul: {
      std::vector<Expectation> factors;
      flatten(f, ExpOp::Mul, factors);
      Box narrowed = region(f, box);
      if (narrowed.empty()) return {Rational(0), Rational(0)};
      ExpRange r{Rational(1), Rational(1)};
      for (const Expectation& x : factors) {
        if (x->op == ExpOp::Iverson) {
          r = product(r, eval_range(x, box));
          continue;
        }
        r = product(r, eval_range(x, narrowed));
      }
      return r;
    }
    case ExpOp::Min: {
      ExpRange a = eval_range(f->a, box);
      ExpRange b = eval_range(f->b, box);
      ExpRange r;
      r.lo = std::min(a.lo, b.lo);
      if (a.hi && b.hi) r.hi = std::min(*a.hi, *b.hi);
      else r.hi = a.hi ? a.hi : b.hi;
      return r;
    }
    case ExpOp::Max: {
      ExpRange a = eval_range(f->a, box);
      ExpRange b = eval_range(f->b, box);
      ExpRange r;
      r.lo = std::max(a.lo, b.lo);
      if (a.hi && b.hi) r.hi = std::max(*a.hi, *b.hi);
      return r;
    }
    case ExpOp::Monus: {
      ExpRange a = eval_range(f->a, box);
      ExpRange b = eval_range(f->b, box);
      ExpRange r;
      if (b.hi && a.lo > *b.hi) r.lo = a.lo - *b.hi;
      if (a.hi) r.hi = std::max(Rational(*a.hi - b.lo), Rational(0));
      return r;
    }
  }
  return {Rational(0), std::nullopt};
}

}  // namespace pgcl
