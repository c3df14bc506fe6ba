#include <doctest.h>

#include "pgcl/eval.hpp"
#include "support.hpp"

using namespace pgcl;

namespace {

ExtRat at(const char* f, const State& s) { return eval(parse_expectation(f), s); }

}  // namespace

TEST_CASE("evaluation of the limit bounds") {
  CHECK(at("[n<0] + [n>=0]*(1/2)^n", State{{"n", 1}}) == ExtRat(Rational(1, 2)));
  CHECK(at("[a != 1]*b + [a = 1]*inf", State{{"a", 1}, {"b", 7}}).is_infinite());
  CHECK(at("[a != 1] b + [a = 1]*inf", State{{"a", 0}, {"b", 7}}) == ExtRat(7));
  CHECK(at("0", State{{"q", 3}}).is_zero());
}

TEST_CASE("guards shield terms that are negative outside them") {
  State s{{"n", 12}};
  CHECK(at("[0 <= n & n <= 10]*(1 - n/10)", s).is_zero());
  CHECK_THROWS_AS(at("1 - n/10", s), NegativeValue);
  CHECK(at("monus(1, n/10)", s).is_zero());
  CHECK(at("1 monus n/10", State{{"n", 5}}) == ExtRat(Rational(1, 2)));
}

TEST_CASE("signed evaluation keeps the sign of terms") {
  CHECK(eval_signed(parse_expectation("[n<=0]*b"), State{{"b", -3}, {"n", 0}}) == -3);
  CHECK(eval_signed(parse_expectation("[n<=0]*b"), State{{"b", -3}, {"n", 1}}) == 0);
  CHECK_THROWS_AS(eval_signed(parse_expectation("inf"), State{}), InfiniteReward);
}

TEST_CASE("substitution") {
  Expectation f = subst(parse_expectation("n"), "n", parse_arith("n - 1"));
  CHECK(eval(f, State{{"n", 5}}) == ExtRat(4));
  Expectation g = subst(parse_expectation("monus((1/2)^n, (1/2)^M)"), "n", parse_arith("n - 1"));
  CHECK(equal(g, parse_expectation("monus((1/2)^(n-1), (1/2)^M)")));
  CHECK(eval(g, State{{"M", 3}, {"n", 2}}) == ExtRat(Rational(3, 8)));
}

TEST_CASE("substitutions on distinct variables commute") {
  testing::ProgramGen gen(5);
  for (int i = 0; i < 100; ++i) {
    Expectation f = ex::add(gen.post(), gen.post());
    // Right-hand sides mention neither x nor y, so the order cannot matter.
    Arith ex_ = arith::add(arith::var("z"), arith::lit(gen.pick(-2, 2)));
    Arith ey = arith::lit(gen.pick(-2, 2));
    Expectation xy = subst(subst(f, "x", ex_), "y", ey);
    Expectation yx = subst(subst(f, "y", ey), "x", ex_);
    State s{{"z", Rational(gen.pick(-3, 3))}};
    // Oracle: evaluate f directly in the updated state.
    State direct{{"x", eval_arith(ex_, s)}, {"y", eval_arith(ey, s)}, {"z", s.get("z")}};
    ExtRat expected = eval(f, direct);
    CHECK(eval(xy, s) == expected);
    CHECK(eval(yx, s) == expected);
  }
}

TEST_CASE("pointwise comparison") {
  std::vector<State> dom = testing::ints("n", -2, 12);
  Comparison zero = compare_pointwise(ex::zero(), parse_expectation("[n<0] + [n>=0]*(1/2)^n"), dom);
  CHECK(zero.order == Order::LEQ);
  Comparison lm = compare_pointwise(parse_expectation("[n<0] + [0<=n & n<=10]*monus((1/2)^n, (1/2)^10)"),
                                    parse_expectation("[n<0] + [n>=0]*(1/2)^n"), dom);
  CHECK((lm.order == Order::LEQ));
  Comparison inc = compare_pointwise(parse_expectation("[n<=0]"), parse_expectation("[n>=0]"), testing::ints("n", -1, 1));
  CHECK(inc.order == Order::INCOMPARABLE);
  REQUIRE(inc.not_leq);
  REQUIRE(inc.not_geq);
  CHECK(*inc.not_leq == State{{"n", -1}});
  CHECK(*inc.not_geq == State{{"n", 1}});
}

TEST_CASE("algebraic identities on random states") {
  testing::ProgramGen gen(9);
  for (int i = 0; i < 100; ++i) {
    Expectation f = gen.post();
    Expectation h = gen.post();
    Guard g = gen.cond();
    State s = gen.state();
    CHECK(eval(ex::add(f, ex::zero()), s) == eval(f, s));
    Expectation split = ex::add(ex::mul_iverson(guard::negate(g), f), ex::mul_iverson(g, h));
    CHECK(eval(split, s) == (eval_guard(g, s) ? eval(h, s) : eval(f, s)));
    Expectation thirds = ex::add(ex::scale(Rational(1, 3), f), ex::scale(Rational(2, 3), f));
    CHECK(eval(thirds, s) == eval(f, s));
  }
}

TEST_CASE("printing round-trips") {
  for (const char* text : {"[n<0] + [0<=n & n<=10]*monus((1/2)^n, (1/2)^10)", "[a != 1]*b + [a = 1]*inf",
                           "[n<0]*b + [0<=n & n<=8]*(b + 2*n)*(1 - n/8)", "min(x, 3) + max(0, y)"}) {
    Expectation f = parse_expectation(text);
    CHECK(equal(parse_expectation(pretty_print(f)), f));
  }
}

TEST_CASE("negative scaling is rejected") { CHECK_THROWS_AS(ex::scale(Rational(-1), ex::one()), NegativeValue); }
