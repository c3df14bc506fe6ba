#include "pgcl/strengthen.hpp"

#include <algorithm>

#include "pgcl/errors.hpp"
#include "pgcl/eval.hpp"
#include "pgcl/syntax.hpp"

namespace pgcl {

namespace {

bool mentions(const Arith& a, const std::string& x) {
  std::vector<std::string> vars;
  collect_vars(a, vars);
  return std::find(vars.begin(), vars.end(), x) != vars.end();
}

bool mentions(const Guard& g, const std::string& x) {
  std::vector<std::string> vars;
  collect_vars(g, vars);
  return std::find(vars.begin(), vars.end(), x) != vars.end();
}

}  // namespace

StrengthenSpec make_box_strengthening(const Guard& g, std::vector<BoxBound> bounds, std::vector<Guard> extra) {
  StrengthenSpec spec;
  spec.base = g;
  spec.bounds = std::move(bounds);
  spec.extra = std::move(extra);
  Guard added;
  auto conjoin = [&added](Guard c) { added = added ? guard::conj(added, std::move(c)) : std::move(c); };
  for (const BoxBound& b : spec.bounds) conjoin(guard::cmp(b.lhs, b.op, b.bound));
  for (const Guard& c : spec.extra) conjoin(c);
  spec.resulting = added ? guard::conj(g, added) : g;
  return spec;
}

StrengthenSpec make_replacement(const Guard& base, const Guard& replacement) {
  StrengthenSpec spec;
  spec.base = base;
  spec.resulting = replacement;
  spec.by_construction = false;
  return spec;
}

Program apply_strengthening(const Program& loop, const StrengthenSpec& spec) {
  if (loop->kind != StmtKind::While) throw Error("strengthening applies to while loops only");
  if (!equal(loop->cond, spec.base) && pretty_print(loop->cond) != pretty_print(spec.base)) {
    throw GuardMismatch("loop guard '" + pretty_print(loop->cond) + "' differs from strengthening base '" +
                        pretty_print(spec.base) + "'");
  }
  return prog::loop(spec.resulting, loop->children[0]);
}

Expectation restricted_post(const Guard& g, const Expectation& f) {
  if (g->op == GuardOp::False) return f;
  if (g->op == GuardOp::True) return ex::zero();
  return ex::mul_iverson(guard::negate(g), f);
}

StrengthenSpec StrengthenTemplate::instantiate(const Guard& base, const std::string& param,
                                               const Rational& value) const {
  Arith v = arith::lit(value);
  auto fix = [&](const Arith& a) { return param.empty() ? a : substitute(a, param, v); };
  auto fix_guard = [&](const Guard& g) { return param.empty() ? g : substitute(g, param, v); };
  if (replacement) return make_replacement(base, fix_guard(*replacement));
  std::vector<BoxBound> bs;
  for (const BoxBound& b : bounds) bs.push_back({fix(b.lhs), b.op, fix(b.bound)});
  std::vector<Guard> gs;
  for (const Guard& g : extra) gs.push_back(fix_guard(g));
  return make_box_strengthening(base, std::move(bs), std::move(gs));
}

SweepFamily make_sweep_family(const Guard& base, const std::string& param, std::vector<Rational> values,
                              StrengthenTemplate shape) {
  SweepFamily fam;
  fam.base = base;
  fam.param = param;
  fam.values = std::move(values);
  fam.shape = std::move(shape);
  std::sort(fam.values.begin(), fam.values.end());
  fam.values.erase(std::unique(fam.values.begin(), fam.values.end()), fam.values.end());

  bool nested = true;
  if (fam.shape.replacement) nested = param.empty() || !mentions(*fam.shape.replacement, param);
  for (const Guard& g : fam.shape.extra) {
    if (!param.empty() && mentions(g, param)) nested = false;
  }
  for (const BoxBound& b : fam.shape.bounds) {
    if (param.empty()) break;
    if (mentions(b.lhs, param)) {
      nested = false;
      continue;
    }
    if (!mentions(b.bound, param)) continue;
    // The bound must loosen as the parameter grows.
    for (std::size_t i = 0; i + 1 < fam.values.size() && nested; ++i) {
      std::vector<std::string> vars;
      collect_vars(b.bound, vars);
      if (vars.size() != 1) {
        nested = false;
        break;
      }
      Rational c0 = eval_constant(substitute(b.bound, param, arith::lit(fam.values[i])));
      Rational c1 = eval_constant(substitute(b.bound, param, arith::lit(fam.values[i + 1])));
      switch (b.op) {
        case CmpOp::Lt:
        case CmpOp::Le:
          nested = c0 <= c1;
          break;
        case CmpOp::Gt:
        case CmpOp::Ge:
          nested = c0 >= c1;
          break;
        case CmpOp::Eq:
          nested = c0 == c1;
          break;
        case CmpOp::Ne:
          nested = false;
          break;
      }
    }
  }
  fam.nested = nested;
  return fam;
}

std::vector<Rational> linear_schedule(const Rational& from, const Rational& to, const Rational& step) {
  if (sgn(step) <= 0) throw Error("sweep step must be positive");
  std::vector<Rational> out;
  for (Rational m = from; m <= to; m += step) out.push_back(m);
  return out;
}

std::vector<Rational> geometric_schedule(const Rational& from, const Rational& to, const Rational& factor) {
  if (factor <= 1 || sgn(from) <= 0) throw Error("geometric sweep needs factor > 1 and a positive start");
  std::vector<Rational> out;
  for (Rational m = from; m <= to; m *= factor) out.push_back(m);
  return out;
}

}  // namespace pgcl
