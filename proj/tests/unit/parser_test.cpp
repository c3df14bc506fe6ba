#include <doctest.h>

#include "pgcl/eval.hpp"
#include "pgcl/syntax.hpp"
#include "support.hpp"

using namespace pgcl;

TEST_CASE("skip parses to Skip") {
  Program p = parse_program("skip");
  CHECK(p->kind == StmtKind::Skip);
  CHECK(pretty_print(p) == "skip");
}

TEST_CASE("biased walk parses to a loop around a probabilistic choice") {
  Program p = parse_program("while (0 < n) { {n := n-1} [1/3] {n := n+1} }");
  REQUIRE(p->kind == StmtKind::While);
  CHECK(equal(p->cond, parse_guard("0 < n")));
  const Program& body = p->children[0];
  REQUIRE(body->kind == StmtKind::ProbChoice);
  CHECK(eval_constant(body->expr) == Rational(1, 3));
  CHECK(body->children[0]->kind == StmtKind::Assign);
  CHECK(body->children[0]->var == "n");
  CHECK(equal(body->children[0]->expr, parse_arith("n - 1")));
  CHECK(equal(body->children[1]->expr, parse_arith("n + 1")));
}

TEST_CASE("iterated uniform choice has one branch per operand") {
  for (const char* text : {"{x := x-1} (+) {x := x+1} (+) {y := y-1}", "{x := x-1} ⊕ {x := x+1} ⊕ {y := y-1}"}) {
    Program p = parse_program(text);
    REQUIRE(p->kind == StmtKind::UniformChoice);
    CHECK(p->children.size() == 3);
  }
}

TEST_CASE("chained comparisons") {
  Guard g = parse_guard("0 < n < 10");
  CHECK(eval_guard(g, State{{"n", 5}}));
  CHECK_FALSE(eval_guard(g, State{{"n", 10}}));
  CHECK_FALSE(eval_guard(g, State{{"n", 0}}));
}

TEST_CASE("syntax errors carry a position") {
  CHECK_THROWS_AS(parse_program("while (n > 0 { skip }"), SyntaxError);
  CHECK_THROWS_AS(parse_program("x := "), SyntaxError);
  CHECK_THROWS_AS(parse_arith("1 +* 2"), SyntaxError);
}

TEST_CASE("arithmetic evaluation") {
  CHECK(eval_arith(parse_arith("n + 1"), State{{"n", 3}}) == 4);
  CHECK(eval_arith(parse_arith("(3 - x)/2"), State{{"x", 0}}) == Rational(3, 2));
  CHECK(eval_arith(parse_arith("abs(x - 1)/4"), State{{"x", -1}}) == Rational(1, 2));
  CHECK(eval_arith(parse_arith("(1/2)^n"), State{{"n", 3}}) == Rational(1, 8));
  CHECK(eval_arith(parse_arith("0.001"), State{}) == Rational(1, 1000));
  CHECK_THROWS_AS(eval_arith(parse_arith("1/n"), State{{"n", 0}}), DivisionByZero);
  CHECK_THROWS_AS(eval_arith(parse_arith("m + 1"), State{{"n", 0}}), UnboundVariable);
}

TEST_CASE("guard evaluation") {
  CHECK_FALSE(eval_guard(parse_guard("x != 0 | y != 0 | z != 0"), State{{"x", 0}, {"y", 0}, {"z", 0}}));
  CHECK(eval_guard(parse_guard("x != 0 | y != 0 | z != 0"), State{{"x", 0}, {"y", 1}, {"z", 0}}));
  CHECK(eval_guard(parse_guard("true"), State{{"q", 7}}));
  CHECK_FALSE(eval_guard(parse_guard("0 < n & n < 10"), State{{"n", 10}}));
}

TEST_CASE("guard implication over a finite domain") {
  Implication a = guard_implies(parse_guard("0 < n & n < 10"), parse_guard("0 < n"), testing::ints("n", -5, 15));
  CHECK(a.holds);
  Guard g = parse_guard("x = y");
  CHECK(guard_implies(g, g, {State{{"x", 0}, {"y", 0}}, State{{"x", 1}, {"y", 0}}}).holds);
  Implication c = guard_implies(parse_guard("n < 10"), parse_guard("0 < n"), testing::ints("n", -1, 11));
  CHECK_FALSE(c.holds);
  REQUIRE(c.witness);
  CHECK(*c.witness == State{{"n", -1}});
}

TEST_CASE("pretty printing reaches a fixpoint after one round on the corpus") {
  for (const char* name : {"1dbrw", "3dsrw", "petersburg", "bounded_update", "continuous", "continuous_mean", "nested",
                           "flrw", "zeroconf", "spiral", "dummy_swapper", "diff_walk"}) {
    CAPTURE(name);
    Program p = testing::corpus_program(name);
    std::string once = pretty_print(p);
    Program q = parse_program(once);
    CHECK(equal(p, q));
    CHECK(pretty_print(q) == once);
  }
}

TEST_CASE("random programs round-trip through the printer") {
  testing::ProgramGen gen(17);
  for (int i = 0; i < 200; ++i) {
    Program p = gen.program(4);
    std::string text = pretty_print(p);
    CAPTURE(text);
    CHECK(equal(parse_program(text), p));
  }
}

TEST_CASE("loop splitting") {
  auto [prefix, loop] = split_loop(testing::corpus_program("zeroconf"));
  CHECK(prefix->kind == StmtKind::Seq);
  CHECK(loop->kind == StmtKind::While);
  auto [none, only] = split_loop(testing::corpus_program("1dbrw"));
  CHECK(none->kind == StmtKind::Skip);
  CHECK(only->kind == StmtKind::While);
  CHECK_THROWS(split_loop(parse_program("x := 1")));
}
