#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pgcl/ast.hpp"
#include "pgcl/rational.hpp"
#include "pgcl/state.hpp"

namespace pgcl {

// Term: an arithmetic leaf. Intermediate values inside a term may be
// negative, but the leaf itself must evaluate to a nonnegative value
// wherever it is actually evaluated.
enum class ExpOp { Const, Term, Iverson, Add, Mul, Min, Max, Monus };

struct ExpNode;
using Expectation = std::shared_ptr<const ExpNode>;

struct ExpNode {
  ExpOp op;
  ExtRat value;  // Const
  Arith term;    // Term
  Guard cond;    // Iverson
  Expectation a;
  Expectation b;
};

namespace ex {
Expectation constant(const ExtRat& v);
Expectation zero();
Expectation one();
Expectation infinity();
Expectation term(Arith a);
Expectation var(std::string name);
Expectation iverson(Guard g);
Expectation add(Expectation a, Expectation b);
Expectation mul(Expectation a, Expectation b);
// Throws NegativeValue for a negative factor.
Expectation scale(const Rational& factor, Expectation a);
Expectation mul_iverson(Guard g, Expectation a);
Expectation min(Expectation a, Expectation b);
Expectation max(Expectation a, Expectation b);
Expectation monus(Expectation a, Expectation b);
Expectation pow(Expectation base, unsigned exponent);
}  // namespace ex

// Products evaluate Iverson and constant factors first and skip the other
// factor when they are zero, so [0 <= n & n <= M]*(1 - n/M) is 0 rather than
// an error outside the bracket.
ExtRat eval(const Expectation& f, const State& s);
// Same traversal without the sign check on terms, for estimators of signed
// quantities. Throws InfiniteReward on an infinite constant.
Rational eval_signed(const Expectation& f, const State& s);

// Eager substitution f[x/e].
Expectation subst(const Expectation& f, const std::string& x, const Arith& e);

bool equal(const Expectation& a, const Expectation& b);
void collect_vars(const Expectation& f, std::vector<std::string>& out);

std::string pretty_print(const Expectation& f);

// Surface syntax: arithmetic plus `[guard]`, `inf`, `monus(a, b)`, infix
// `monus`, and juxtaposed products such as `[a != 1] b`.
Expectation parse_expectation(std::string_view text);

enum class Order { LEQ, GEQ, EQ, INCOMPARABLE };
const char* order_name(Order o);

struct Comparison {
  Order order = Order::EQ;
  std::optional<State> not_leq;  // state with f > g
  std::optional<State> not_geq;  // state with f < g
};

Comparison compare_pointwise(const Expectation& f, const Expectation& g, const std::vector<State>& domain);

}  // namespace pgcl
