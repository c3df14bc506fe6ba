#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pgcl/ast.hpp"
#include "pgcl/expectation.hpp"

namespace pgcl {

// lhs op bound, e.g. "n < M" or "abs(x) < M".
struct BoxBound {
  Arith lhs;
  CmpOp op;
  Arith bound;
};

struct StrengthenSpec {
  Guard base;
  std::vector<BoxBound> bounds;
  std::vector<Guard> extra;  // arbitrary conjuncts, still conjoined onto base
  Guard resulting;
  // False only for a wholesale guard replacement, which then needs a
  // guard_implies check on a domain before use.
  bool by_construction = true;
};

StrengthenSpec make_box_strengthening(const Guard& g, std::vector<BoxBound> bounds, std::vector<Guard> extra = {});
StrengthenSpec make_replacement(const Guard& base, const Guard& replacement);

// Throws GuardMismatch unless the loop guard equals spec.base.
Program apply_strengthening(const Program& loop, const StrengthenSpec& spec);

// [!g] * f
Expectation restricted_post(const Guard& g, const Expectation& f);

// Strengthening template with a free integer parameter, e.g. n < M.
struct StrengthenTemplate {
  std::vector<BoxBound> bounds;
  std::vector<Guard> extra;
  std::optional<Guard> replacement;

  // Instantiates the template with `param` set to `value` (param may be empty).
  StrengthenSpec instantiate(const Guard& base, const std::string& param, const Rational& value) const;
};

struct SweepFamily {
  Guard base;
  std::string param;
  std::vector<Rational> values;
  StrengthenTemplate shape;
  // Each member implies the next one: set when every bound loosens as the
  // parameter grows and nothing else depends on it.
  bool nested = false;

  StrengthenSpec at(const Rational& value) const { return shape.instantiate(base, param, value); }
};

SweepFamily make_sweep_family(const Guard& base, const std::string& param, std::vector<Rational> values,
                              StrengthenTemplate shape);

std::vector<Rational> linear_schedule(const Rational& from, const Rational& to, const Rational& step);
std::vector<Rational> geometric_schedule(const Rational& from, const Rational& to, const Rational& factor);

}  // namespace pgcl
