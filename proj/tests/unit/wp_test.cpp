#include <doctest.h>

#include "pgcl/eval.hpp"
#include "pgcl/strengthen.hpp"
#include "pgcl/wp.hpp"
#include "support.hpp"

using namespace pgcl;

namespace {

const char* kBiasedBound = "[n<0] + [0<=n & n<=10]*monus((1/2)^n, (1/2)^10)";

// Expected value of f after c, from the exact final distribution.
ExtRat expected_after(const Program& c, const Expectation& f, const State& s) {
  SubDistribution d = step_distribution(c, s);
  ExtRat sum = 0;
  for (const auto& [t, w] : d.outcomes) sum += ExtRat(w) * eval(f, t);
  return sum;
}

}  // namespace

TEST_CASE("wp of skip is the identity") {
  Expectation f = parse_expectation(kBiasedBound);
  CHECK(equal(wp_symbolic(parse_program("skip"), f), f));
}

TEST_CASE("wp of the biased step") {
  Program body = parse_program("{n := n-1} [1/3] {n := n+1}");
  Expectation l = parse_expectation(kBiasedBound);
  Expectation w = wp_symbolic(body, l);
  Expectation expected = ex::add(ex::scale(Rational(1, 3), subst(l, "n", parse_arith("n - 1"))),
                                 ex::scale(Rational(2, 3), subst(l, "n", parse_arith("n + 1"))));
  for (const State& s : testing::ints("n", -3, 14)) {
    CAPTURE(s.str());
    CHECK(eval(w, s) == eval(expected, s));
  }
}

TEST_CASE("wp of a fair coin draw") {
  Expectation w = wp_symbolic(parse_program("x :~ dist{1/2: 0, 1/2: 1}"), parse_expectation("x"));
  CHECK(eval(w, State{}) == ExtRat(Rational(1, 2)));
  CHECK(eval(w, State{{"x", 9}}) == ExtRat(Rational(1, 2)));
}

TEST_CASE("wp rejects loops and continuous sampling") {
  CHECK_THROWS(wp_symbolic(parse_program("while (0 < n) { n := n - 1 }"), ex::one()));
  CHECK_THROWS(wp_symbolic(parse_program("u :~ uniform(0, 1)"), ex::one()));
}

TEST_CASE("wp is linear and monotone on random loop-free programs") {
  testing::ProgramGen gen(2024);
  for (int i = 0; i < 100; ++i) {
    Program c = gen.program(4);
    Expectation f = gen.post();
    Expectation g = gen.post();
    Rational a = Rational(gen.pick(0, 6)) / 3;
    Rational b = Rational(gen.pick(0, 6)) / 2;
    Expectation combo = ex::add(ex::scale(a, f), ex::scale(b, g));
    Expectation wf = wp_symbolic(c, f);
    Expectation wg = wp_symbolic(c, g);
    Expectation wcombo = wp_symbolic(c, combo);
    CAPTURE(pretty_print(c));
    for (int k = 0; k < 5; ++k) {
      State s = gen.state();
      ExtRat lhs = eval(wcombo, s);
      ExtRat rhs = ExtRat(a) * eval(wf, s) + ExtRat(b) * eval(wg, s);
      CHECK(lhs == rhs);
      CHECK(lhs == expected_after(c, combo, s));
      // f <= f + g pointwise, so the same must hold after wp.
      CHECK(eval(wf, s) <= eval(wp_symbolic(c, ex::add(f, g)), s));
      CHECK(eval(wf, s) == expected_after(c, f, s));
    }
  }
}

TEST_CASE("characteristic function") {
  Program flrw = testing::corpus_program("flrw");
  const long m = 7;
  Program loop = apply_strengthening(flrw, make_box_strengthening(flrw->cond, {{arith::var("n"), CmpOp::Lt, arith::lit(m)}}));
  CharFn phi = char_fn(loop, restricted_post(flrw->cond, ex::one()));
  ValueFn l = closed_form(parse_expectation("[n<0] + [0<=n & n<=7]*(1 - n/7)"));
  StepEngine engine;
  for (long k = 1; k < m; ++k) {
    Applied v = char_fn_apply(phi, l, State{{"n", k}}, engine);
    CHECK_FALSE(v.truncated);
    CHECK(v.value == ExtRat(1 - Rational(k) / m + 1 / (Rational(2 * k + 1) * m)));
  }
  // Outside the guard Phi returns the post regardless of h.
  CHECK(char_fn_apply(phi, l, State{{"n", 0}}, engine).value == ExtRat(1));
  CHECK(char_fn_apply(phi, l, State{{"n", 7}}, engine).value == ExtRat(0));

  Program walk = testing::corpus_program("1dbrw");
  CharFn psi = char_fn(walk, restricted_post(walk->cond, ex::one()));
  ValueFn zero = closed_form(ex::zero());
  CHECK(char_fn_apply(psi, zero, State{{"n", 1}}, engine).value.is_zero());
  // One more application picks up the mass that terminates in one step.
  ValueFn once = [&](const State& s) { return char_fn_apply(psi, zero, s, engine).value; };
  CHECK(char_fn_apply(psi, once, State{{"n", 1}}, engine).value == ExtRat(Rational(1, 3)));
}

TEST_CASE("one-step distributions") {
  SubDistribution skip = step_distribution(parse_program("skip"), State{{"x", 4}});
  REQUIRE(skip.outcomes.size() == 1);
  CHECK(skip.outcomes[0].first == State{{"x", 4}});
  CHECK(skip.total_mass == 1);

  Program walk3 = testing::corpus_program("3dsrw");
  SubDistribution six = step_distribution(walk3->children[0], State{{"x", 1}, {"y", 0}, {"z", 0}});
  CHECK(six.outcomes.size() == 6);
  for (const auto& [t, w] : six.outcomes) CHECK(w == Rational(1, 6));

  // Inner loop of the nested example, a = 2 and b = 1, started at k = n.
  auto [prefix, outer] = split_loop(testing::corpus_program("nested"));
  const Program& body = outer->children[0];
  REQUIRE(body->kind == StmtKind::Seq);
  Program inner = body->children[1];
  REQUIRE(inner->kind == StmtKind::While);
  SubDistribution exit = step_distribution(inner, State{{"k", 5}, {"n", 5}});
  REQUIRE(exit.outcomes.size() == 2);
  CHECK(exit.outcomes[0].first == State{{"k", 3}, {"n", 5}});
  CHECK(exit.outcomes[0].second == Rational(1, 3));  // (b - 0)/(b + a)
  CHECK(exit.outcomes[1].first == State{{"k", 6}, {"n", 5}});
  CHECK(exit.outcomes[1].second == Rational(2, 3));  // (0 + a)/(b + a)
  CHECK(exit.total_mass == 1);
}

TEST_CASE("diverge loses all mass") {
  SubDistribution d = step_distribution(parse_program("diverge"), State{});
  CHECK(d.outcomes.empty());
  CHECK(d.total_mass == 0);
  CHECK(d.truncated_mass == 0);
}

TEST_CASE("Kleene iterates") {
  Program walk = testing::corpus_program("1dbrw");
  Program loop = apply_strengthening(walk, make_box_strengthening(walk->cond, {{arith::var("n"), CmpOp::Lt, arith::lit(3)}}));
  CharFn phi = char_fn(loop, restricted_post(walk->cond, ex::one()));
  std::vector<State> dom = testing::ints("n", -1, 4);
  StepEngine engine;
  std::vector<Table> it = kleene_iterate(phi, dom, 50, engine);
  REQUIRE(it.size() == 51);
  for (const auto& [s, v] : it[0]) CHECK(v.is_zero());
  for (std::size_t k = 0; k + 1 < it.size(); ++k) {
    for (const State& s : dom) CHECK(it[k].at(s) <= it[k + 1].at(s));
  }
  Rational exact = testing::ruin(Rational(1, 3), 1, 3);  // 3/7
  ExtRat last = it.back().at(State{{"n", 1}});
  CHECK(last <= ExtRat(exact));
  CHECK(exact - last.value() < parse_rational("0.000000001"));
}
