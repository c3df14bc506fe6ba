#include <doctest.h>

#include "pgcl/eval.hpp"
#include "pgcl/strengthen.hpp"
#include "support.hpp"

using namespace pgcl;

TEST_CASE("a box bound conjoins onto the guard") {
  Guard g = parse_guard("0 < n");
  StrengthenSpec s = make_box_strengthening(g, {{arith::var("n"), CmpOp::Lt, arith::lit(10)}});
  CHECK(s.by_construction);
  for (const State& st : testing::ints("n", -3, 14)) {
    CHECK(eval_guard(s.resulting, st) == eval_guard(parse_guard("0 < n & n < 10"), st));
  }
}

TEST_CASE("no bounds leave the guard alone") {
  Guard g = parse_guard("0 < n");
  StrengthenSpec s = make_box_strengthening(g, {});
  CHECK(equal(s.resulting, g));
  Program loop = testing::corpus_program("1dbrw");
  CHECK(equal(apply_strengthening(loop, s), loop));
}

TEST_CASE("absolute bounds give the cube guard of the 3-D walk") {
  Program loop = testing::corpus_program("3dsrw");
  std::vector<BoxBound> cube;
  for (const char* v : {"x", "y", "z"}) cube.push_back({arith::abs(arith::var(v)), CmpOp::Lt, arith::lit(4)});
  StrengthenSpec s = make_box_strengthening(loop->cond, cube);
  Guard expected = parse_guard("(x != 0 | y != 0 | z != 0) & abs(x) < 4 & abs(y) < 4 & abs(z) < 4");
  testing::ProgramGen gen(1);
  for (int i = 0; i < 300; ++i) {
    State st{{"x", gen.pick(-5, 5)}, {"y", gen.pick(-5, 5)}, {"z", gen.pick(-5, 5)}};
    CHECK(eval_guard(s.resulting, st) == eval_guard(expected, st));
  }
}

TEST_CASE("strengthened loops keep their body") {
  Program walk = testing::corpus_program("1dbrw");
  Program m = apply_strengthening(walk, make_box_strengthening(walk->cond, {{arith::var("n"), CmpOp::Lt, arith::lit(7)}}));
  CHECK(equal(m->children[0], walk->children[0]));
  CHECK(eval_guard(m->cond, State{{"n", 6}}));
  CHECK_FALSE(eval_guard(m->cond, State{{"n", 7}}));

  Program pd = testing::corpus_program("petersburg");
  Program pm = apply_strengthening(pd, make_box_strengthening(pd->cond, {{arith::var("b"), CmpOp::Lt, arith::lit(8)}}));
  CHECK(eval_guard(pm->cond, State{{"a", 1}, {"b", 4}}));
  CHECK_FALSE(eval_guard(pm->cond, State{{"a", 1}, {"b", 8}}));
  CHECK_FALSE(eval_guard(pm->cond, State{{"a", 0}, {"b", 4}}));
}

TEST_CASE("a strengthening for another guard is rejected") {
  Program walk = testing::corpus_program("1dbrw");
  StrengthenSpec s = make_box_strengthening(parse_guard("0 < m"), {});
  CHECK_THROWS_AS(apply_strengthening(walk, s), GuardMismatch);
}

TEST_CASE("replacement guards are not strengthenings by construction") {
  StrengthenSpec s = make_replacement(parse_guard("0 < n"), parse_guard("1 < n & n < 5"));
  CHECK_FALSE(s.by_construction);
}

TEST_CASE("restricted postexpectation") {
  Expectation f = restricted_post(parse_guard("0 < n"), ex::one());
  CHECK(eval(f, State{{"n", 0}}) == ExtRat(1));
  CHECK(eval(f, State{{"n", 1}}).is_zero());
  Expectation all = restricted_post(guard::falsity(), parse_expectation("b"));
  CHECK(eval(all, State{{"b", 3}}) == ExtRat(3));
  Expectation pd = restricted_post(parse_guard("a = 1"), parse_expectation("b"));
  CHECK(eval(pd, State{{"a", 0}, {"b", 5}}) == ExtRat(5));
  CHECK(eval(pd, State{{"a", 1}, {"b", 5}}).is_zero());
}

TEST_CASE("templates instantiate at a parameter value") {
  StrengthenTemplate t;
  t.bounds.push_back({arith::var("n"), CmpOp::Lt, parse_arith("2*M")});
  StrengthenSpec s = t.instantiate(parse_guard("0 < n"), "M", 5);
  CHECK(eval_guard(s.resulting, State{{"n", 9}}));
  CHECK_FALSE(eval_guard(s.resulting, State{{"n", 10}}));
}

TEST_CASE("nestedness of sweep families") {
  Guard g = parse_guard("0 < n");
  StrengthenTemplate up;
  up.bounds.push_back({arith::var("n"), CmpOp::Lt, arith::var("M")});
  CHECK(make_sweep_family(g, "M", {1, 2, 3}, up).nested);
  StrengthenTemplate down;
  down.bounds.push_back({arith::var("n"), CmpOp::Gt, arith::var("M")});
  CHECK_FALSE(make_sweep_family(g, "M", {1, 2, 3}, down).nested);
  StrengthenTemplate other;
  other.extra.push_back(parse_guard("n*M < 7"));
  CHECK_FALSE(make_sweep_family(g, "M", {1, 2, 3}, other).nested);
}

TEST_CASE("schedules") {
  CHECK(linear_schedule(2, 8, 1).size() == 7);
  CHECK(linear_schedule(5, 40, 5).back() == 40);
  std::vector<Rational> geo = geometric_schedule(2, 64, 2);
  CHECK(geo.size() == 6);
  CHECK(geo.back() == 64);
  CHECK_THROWS(linear_schedule(1, 3, 0));
}
