#pragma once

#include <optional>
#include <vector>

#include "pgcl/ast.hpp"
#include "pgcl/state.hpp"

namespace pgcl {

// Exponents are limited to this magnitude to keep exact arithmetic bounded.
inline constexpr long kMaxExponent = 100000;

Rational eval_arith(const Arith& e, const State& s);
bool eval_guard(const Guard& g, const State& s);

// Value of a variable-free expression.
Rational eval_constant(const Arith& e);

struct Implication {
  bool holds = true;
  std::optional<State> witness;  // g1 true, g2 false
};

// Decided by enumerating the given finite domain.
Implication guard_implies(const Guard& g1, const Guard& g2, const std::vector<State>& domain);

}  // namespace pgcl
