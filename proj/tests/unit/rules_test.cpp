#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "pgcl/eval.hpp"
#include "pgcl/region.hpp"
#include "pgcl/rules.hpp"
#include "pgcl/strengthen.hpp"
#include "support.hpp"

using namespace pgcl;

namespace {

const char* kBiasedBound = "[n<0] + [0<=n & n<=M]*monus((1/2)^n, (1/2)^M)";
const char* kFairBound = "[n<0] + [0<=n & n<=M]*(1 - n/M)";

Expectation at_m(const char* text, long m) { return subst(parse_expectation(text), "M", arith::lit(m)); }

StrengthenSpec below(const Program& loop, const char* var, long m) {
  return make_box_strengthening(loop->cond, {{arith::var(var), CmpOp::Lt, arith::lit(m)}});
}

Program strengthened(const char* name, const char* var, long m) {
  Program loop = testing::corpus_program(name);
  return apply_strengthening(loop, below(loop, var, m));
}

Rational evidence(const SideCondition& c, const std::string& key) {
  const std::string* v = c.get(key);
  REQUIRE(v);
  return parse_rational(*v);
}

const SideCondition& condition(const std::vector<SideCondition>& cs, ConditionKind k) {
  for (const SideCondition& c : cs) {
    if (c.kind == k) return c;
  }
  FAIL("missing condition " << kind_name(k));
  throw Error("unreachable");
}

}  // namespace

TEST_CASE("superinvariants of the biased walk") {
  Program walk = testing::corpus_program("1dbrw");
  std::vector<State> dom = testing::ints("n", -3, 50);
  // Termination probability of the unbounded walk: (1/2)^n from n > 0.
  Expectation exact = parse_expectation("[n<=0] + [0<n]*(1/2)^n");
  CHECK(check_superinvariant(walk, ex::one(), exact, dom).status == Status::VERIFIED_ON_DOMAIN);
  CHECK(check_superinvariant(walk, ex::one(), ex::infinity(), dom).status == Status::VERIFIED);

  SideCondition zero = check_superinvariant(walk, ex::one(), ex::zero(), dom);
  CHECK(zero.status == Status::FAILED);
  REQUIRE(zero.witness);
  CHECK_FALSE(eval_guard(walk->cond, *zero.witness));
}

TEST_CASE("subinvariants after strengthening") {
  for (long m : {3L, 10L}) {
    Program loop = strengthened("1dbrw", "n", m);
    Expectation post = restricted_post(parse_guard("0 < n"), ex::one());
    std::vector<State> dom = testing::ints("n", -2, m + 2);
    CAPTURE(m);
    CHECK(check_subinvariant(loop, post, at_m(kBiasedBound, m), dom).status == Status::VERIFIED_ON_DOMAIN);
    CHECK(check_subinvariant(loop, post, ex::zero(), dom).status == Status::VERIFIED);
    // The unbounded walk's termination probability is too large for the strengthened loop.
    SideCondition big = check_subinvariant(loop, post, parse_expectation("[n<=0] + [0<n]*(1/2)^n"), dom);
    CHECK(big.status == Status::FAILED);
  }
  Program flrw = strengthened("flrw", "n", 7);
  Expectation post = restricted_post(testing::corpus_program("flrw")->cond, ex::one());
  CHECK(check_subinvariant(flrw, post, at_m(kFairBound, 7), testing::ints("n", -2, 9)).status ==
        Status::VERIFIED_ON_DOMAIN);
}

TEST_CASE("AST witness of the strengthened biased walk") {
  const long m = 10;
  Program loop = strengthened("1dbrw", "n", m);
  std::vector<State> dom = testing::ints("n", -2, m + 2);
  SideCondition c = check_ast_witness(loop, m, dom);
  CHECK(c.status == Status::VERIFIED);
  // Stepping up M - 1 times in a row leaves from any guard state.
  CHECK(evidence(c, "p") <= 1 - testing::pow_q(Rational(2, 3), m - 1));

  SideCondition searched = check_ast_witness(loop, std::nullopt, dom);
  CHECK(searched.status == Status::VERIFIED);
  CHECK(evidence(searched, "N") <= m);
  CHECK(evidence(searched, "p") < 1);
}

TEST_CASE("AST witness over an unbounded closure") {
  Program pd = testing::corpus_program("petersburg");
  std::vector<State> dom = parse_region("a=0|1, b=1..8");
  Budget small;
  small.max_states = 50;
  // b doubles forever, so the closure exceeds any budget; one step exits with 1/2 everywhere.
  SideCondition c = check_ast_witness(pd, 1, dom, small);
  CHECK(c.status == Status::VERIFIED);
  CHECK(evidence(c, "p") == Rational(1, 2));
  REQUIRE(c.get("method"));
  CHECK(*c.get("method") == "symbolic");
}

TEST_CASE("a truncated closure never certifies a non-terminating walk") {
  Program walk = testing::corpus_program("1dbrw");
  std::vector<State> dom = testing::ints("n", -2, 12);
  Budget small;
  small.max_states = 2000;
  SideCondition c = check_ast_witness(walk, std::nullopt, dom, small, 200);
  CHECK_FALSE(passes(c.status));
  Certificate cert = hark_lower_bound(walk, ex::one(), ex::one(), dom, small);
  CHECK(cert.verdict != Verdict::CERTIFIED);
}

TEST_CASE("a diverging body fails the AST witness") {
  Program loop = parse_program("while (x = 0) { diverge }");
  SideCondition c = check_ast_witness(loop, 3, {State{{"x", 0}}});
  CHECK(c.status == Status::FAILED);
  CHECK(evidence(c, "p") == 1);
  REQUIRE(c.witness);
  CHECK(*c.witness == State{{"x", 0}});
  // No guard state in the domain is trivially fine.
  CHECK(check_ast_witness(loop, 3, {State{{"x", 1}}}).status == Status::VERIFIED);
}

TEST_CASE("bounded update detection") {
  SideCondition bu = detect_bounded_update(testing::corpus_program("bounded_update"));
  CHECK(bu.status == Status::VERIFIED);
  CHECK(evidence(bu, "c") == 3);
  SideCondition skip = detect_bounded_update(parse_program("while (0 < n) { skip }"));
  CHECK(skip.status == Status::VERIFIED);
  CHECK(evidence(skip, "c") == 0);
  CHECK(detect_bounded_update(parse_program("while (0 < x) { x := 2*x }")).status == Status::UNKNOWN);
  CHECK(is_piecewise_polynomial(at_m(kFairBound, 5)));
  CHECK_FALSE(is_piecewise_polynomial(parse_expectation("(1/2)^n")));
}

TEST_CASE("uniform integrability criteria") {
  SUBCASE("St. Petersburg: finitely many steps") {
    const long m = 16;
    Program loop = strengthened("petersburg", "b", m);
    Expectation l = at_m(
        "[a != 1]*b + [a = 1 & M/2 <= b & b < M]*1*b/2 + [a = 1 & M/4 <= b & b < M/2]*2*b/2"
        " + [a = 1 & M/8 <= b & b < M/4]*3*b/2 + [a = 1 & M/16 <= b & b < M/8]*4*b/2",
        m);
    std::vector<State> dom = parse_region("a=0|1, b=1..32");
    std::vector<SideCondition> ui = ui_report(loop, l, dom);
    const SideCondition& a = condition(ui, ConditionKind::UI_LOOPTIME_BOUNDED);
    CHECK(passes(a.status));
    // b doubles each round, so at most log2(M) iterations.
    CHECK(evidence(a, "N") == 4);
  }
  SUBCASE("bounded update: only the orthogonal criterion") {
    const long m = 8;
    Program loop = strengthened("bounded_update", "n", m);
    Expectation l = at_m("[n<0]*b + [0<=n & n<=M]*(b + 2*n)*(1 - n/M)", m);
    std::vector<State> dom = parse_region("n=0..9, b=0..20");
    std::vector<SideCondition> ui = ui_report(loop, l, dom);
    CHECK_FALSE(passes(condition(ui, ConditionKind::UI_LOOPTIME_BOUNDED).status));
    CHECK_FALSE(passes(condition(ui, ConditionKind::UI_CDB).status));
    CHECK_FALSE(passes(condition(ui, ConditionKind::UI_BOUNDED).status));
    const SideCondition& o = condition(ui, ConditionKind::UI_BOUNDED_UPDATE_POLY);
    CHECK(passes(o.status));
  }
  SUBCASE("fair-in-the-limit walk: bounded l") {
    const long m = 7;
    Program loop = strengthened("flrw", "n", m);
    std::vector<SideCondition> ui = ui_report(loop, at_m(kFairBound, m), testing::ints("n", -2, m + 2));
    const SideCondition& c = condition(ui, ConditionKind::UI_BOUNDED);
    CHECK(passes(c.status));
    CHECK(evidence(c, "c") >= 1);
  }
}

TEST_CASE("McIver-Morgan variants") {
  const long m = 6;
  Program loop = strengthened("1dbrw", "n", m);
  Expectation post = restricted_post(parse_guard("0 < n"), ex::one());
  std::vector<State> dom = testing::ints("n", -1, m + 1);
  // Exact termination probability of the strengthened walk; it agrees with f outside the guard.
  Rational top = testing::pow_q(Rational(2), m);
  Expectation exact = ex::add(parse_expectation("[n <= 0]"),
                              ex::scale(top / (top - 1), at_m("[0 < n & n <= M]*monus((1/2)^n, (1/2)^M)", m)));
  Table p_one;
  Table p_half;
  for (const State& s : dom) {
    p_one[s] = ExtRat(1L);
    p_half[s] = ExtRat(eval_guard(loop->cond, s) ? Rational(1, 2) : Rational(1));
  }

  SUBCASE("(a) indicator bound") {
    MMInput in;
    in.variant = MMVariant::A;
    in.p_lower = p_half;
    Expectation l = parse_expectation("[n <= 0]");
    Certificate cert = mciver_morgan_bound(loop, post, l, in, dom);
    CHECK(cert.verdict == Verdict::CERTIFIED);
    REQUIRE(cert.conclusion);
    CHECK(cert.conclusion->at(State{{"n", 0}}) == ExtRat(1L));
    CHECK(cert.conclusion->at(State{{"n", 2}}).is_zero());
    CHECK(mciver_morgan_bound(loop, post, at_m(kBiasedBound, m), in, dom).verdict == Verdict::FAILED);
  }
  SUBCASE("(b) a region where termination is certain") {
    MMInput in;
    in.variant = MMVariant::B;
    in.p_lower = p_half;
    in.g = parse_guard("n <= 0");
    Expectation l = exact;
    Certificate cert = mciver_morgan_bound(loop, post, l, in, dom);
    CHECK(cert.verdict == Verdict::CERTIFIED);
    REQUIRE(cert.conclusion);
    CHECK(cert.conclusion->at(State{{"n", 2}}).is_zero());
    in.g = guard::truth();
    Certificate bad = mciver_morgan_bound(loop, post, l, in, dom);
    CHECK(bad.verdict == Verdict::FAILED);
    CHECK(bad.find(ConditionKind::MM_PREMISE)->status == Status::FAILED);
  }
  SUBCASE("(c) epsilon from the data") {
    MMInput in;
    in.variant = MMVariant::C;
    in.p_lower = p_one;
    Certificate cert = mciver_morgan_bound(loop, post, exact, in, dom);
    CHECK(cert.verdict == Verdict::CERTIFIED);
    CHECK(evidence(*cert.find(ConditionKind::MM_PREMISE), "epsilon") >= 1);
    in.epsilon = Rational(0);
    CHECK(mciver_morgan_bound(loop, post, exact, in, dom).verdict == Verdict::FAILED);
  }
}

TEST_CASE("guard strengthening with the HARK rule") {
  CertifyRequest req;
  req.loop = testing::corpus_program("1dbrw");
  req.post = ex::one();
  req.bound = at_m(kBiasedBound, 10);
  req.spec = below(req.loop, "n", 10);
  req.domain = testing::ints("n", -2, 12);
  Certificate cert = certify_lower_bound(req);
  CHECK(cert.verdict == Verdict::CERTIFIED);
  CHECK(cert.find(ConditionKind::GUARD_IMPLIES)->status == Status::VERIFIED);

  // Plain addition instead of monus overshoots at n = 0.
  req.bound = at_m("[n<0] + [0<=n & n<=M]*((1/2)^n + (1/2)^M)", 10);
  Certificate wrong = certify_lower_bound(req);
  CHECK(wrong.verdict == Verdict::FAILED);
}

TEST_CASE("a replacement guard that is not stronger is rejected") {
  CertifyRequest req;
  req.loop = testing::corpus_program("1dbrw");
  req.post = ex::one();
  req.spec = make_replacement(req.loop->cond, parse_guard("-1 < n & n < 5"));
  req.domain = testing::ints("n", -2, 7);
  Certificate cert = certify_lower_bound(req);
  CHECK(cert.verdict == Verdict::FAILED);
  const SideCondition* gi = cert.find(ConditionKind::GUARD_IMPLIES);
  REQUIRE(gi);
  CHECK(gi->status == Status::FAILED);
  REQUIRE(gi->witness);
  CHECK(*gi->witness == State{{"n", 0}});

  req.spec = make_replacement(req.loop->cond, parse_guard("1 < n & n < 5"));
  CHECK(certify_lower_bound(req).find(ConditionKind::GUARD_IMPLIES)->status == Status::VERIFIED_ON_DOMAIN);
}

TEST_CASE("exact solve on the strengthened 3-D walk") {
  const long m = 3;
  CertifyRequest req;
  req.loop = testing::corpus_program("3dsrw");
  req.post = ex::one();
  std::vector<BoxBound> cube;
  for (const char* v : {"x", "y", "z"}) cube.push_back({arith::abs(arith::var(v)), CmpOp::Lt, arith::lit(m)});
  req.spec = make_box_strengthening(req.loop->cond, cube);
  req.inner = InnerRule::EXACT_SOLVE;
  req.domain = parse_region("x=-3..3, y=-3..3, z=-3..3");
  Certificate cert = certify_lower_bound(req);
  CHECK(cert.verdict == Verdict::CERTIFIED);
  REQUIRE(cert.conclusion);

  // Independent floating-point Gauss-Seidel on the cube: v = 1 at the origin,
  // 0 on the faces, the average of the 6 neighbours inside.
  const int w = 2 * m + 1;
  std::vector<double> v(w * w * w, 0.0);
  auto at = [&](int x, int y, int z) -> double& { return v[((x + m) * w + (y + m)) * w + (z + m)]; };
  at(0, 0, 0) = 1;
  for (int it = 0; it < 5000; ++it) {
    for (int x = 1 - m; x < m; ++x)
      for (int y = 1 - m; y < m; ++y)
        for (int z = 1 - m; z < m; ++z) {
          if (x == 0 && y == 0 && z == 0) continue;
          at(x, y, z) = (at(x - 1, y, z) + at(x + 1, y, z) + at(x, y - 1, z) + at(x, y + 1, z) + at(x, y, z - 1) +
                         at(x, y, z + 1)) / 6;
        }
  }
  for (const State& s : {State{{"x", 1}, {"y", 0}, {"z", 0}}, State{{"x", 2}, {"y", -1}, {"z", 1}}}) {
    CAPTURE(s.str());
    double got = cert.conclusion->at(s).value().get_d();
    int x = static_cast<int>(s.get("x").get_d()), y = static_cast<int>(s.get("y").get_d()),
        z = static_cast<int>(s.get("z").get_d());
    CHECK(std::abs(got - at(x, y, z)) < 1e-9);
  }
  CHECK(cert.conclusion->at(State{{"x", 3}, {"y", 0}, {"z", 0}}).is_zero());
}

TEST_CASE("truncation policy") {
  CHECK(invariant_status(Direction::SUPER, true, false) == Status::VERIFIED_ON_DOMAIN);
  CHECK(invariant_status(Direction::SUPER, false, false) == Status::FAILED);
  CHECK(invariant_status(Direction::SUB, true, false) == Status::VERIFIED_ON_DOMAIN);
  CHECK(invariant_status(Direction::SUB, false, false) == Status::FAILED);
  // A truncated Phi is a lower bound: it can refute u but not confirm it,
  // and for l it can confirm but not refute.
  CHECK(invariant_status(Direction::SUPER, true, true) == Status::REPORTED_UNCHECKED);
  CHECK(invariant_status(Direction::SUPER, false, true) == Status::FAILED);
  CHECK(invariant_status(Direction::SUB, true, true) == Status::VERIFIED_ON_DOMAIN);
  CHECK(invariant_status(Direction::SUB, false, true) == Status::REPORTED_UNCHECKED);
}

TEST_CASE("names round-trip") {
  for (Status s : {Status::VERIFIED, Status::VERIFIED_ON_DOMAIN, Status::REPORTED_UNCHECKED, Status::FAILED,
                   Status::UNKNOWN}) {
    CHECK(parse_status(status_name(s)) == s);
  }
  CHECK(parse_kind(kind_name(ConditionKind::UI_CDB)) == ConditionKind::UI_CDB);
  CHECK(parse_rule(rule_name(Rule::MM_LOWER)) == Rule::MM_LOWER);
  CHECK(parse_inner_rule(inner_rule_name(InnerRule::EXACT_SOLVE)) == InnerRule::EXACT_SOLVE);
  CHECK_THROWS(parse_status("MAYBE"));
}

TEST_CASE("certified lower bounds never exceed the exact value") {
  testing::ProgramGen gen(31);
  int certified = 0;
  for (int i = 0; i < 40; ++i) {
    long m = gen.pick(2, 7);
    Rational scale = Rational(gen.pick(1, 8)) / 4;
    long bump_at = gen.pick(0, static_cast<int>(m));
    Rational bump = Rational(gen.pick(0, 2)) / 16;
    Expectation l = ex::add(ex::scale(scale, at_m(kBiasedBound, m)),
                            ex::mul_iverson(parse_guard("n = " + std::to_string(bump_at)), ex::constant(ExtRat(bump))));
    CertifyRequest req;
    req.loop = testing::corpus_program("1dbrw");
    req.post = ex::one();
    req.bound = l;
    req.spec = below(req.loop, "n", m);
    req.inner = gen.pick(0, 1) ? InnerRule::HARK : InnerRule::MM;
    req.domain = testing::ints("n", -1, m + 1);
    Certificate cert = certify_lower_bound(req);
    if (cert.verdict != Verdict::CERTIFIED) continue;
    ++certified;
    for (long n = 0; n <= m; ++n) {
      CAPTURE(m);
      CAPTURE(n);
      CAPTURE(pretty_print(l));
      // Probability of hitting 0 before m.
      Rational exact = n == m ? Rational(0) : testing::ruin(Rational(1, 3), n, m);
      CHECK(eval(l, State{{"n", n}}) <= ExtRat(exact));
    }
  }
  CHECK(certified > 5);
}

TEST_CASE("premises on p cover states reachable from the domain") {
  // The unbounded walk terminates with (1/2)^n, positive on any finite
  // domain but with infimum 0, so no epsilon works for l = 1.
  Program walk = testing::corpus_program("1dbrw");
  std::vector<State> dom = testing::ints("n", -2, 12);
  MMInput in;
  in.variant = MMVariant::C;
  for (const State& s : dom) {
    long n = s.get("n").get_num().get_si();
    in.p_lower[s] = ExtRat(n <= 0 ? Rational(1) : testing::pow_q(Rational(1, 2), n));
  }
  Budget small;
  small.max_states = 500;
  Certificate c = mciver_morgan_bound(walk, ex::one(), ex::one(), in, dom, small);
  CHECK(c.verdict != Verdict::CERTIFIED);
  CHECK(c.find(ConditionKind::MM_PREMISE)->status == Status::UNKNOWN);

  // Strengthened walk, domain too small for its runs and p known only there.
  const long m = 6;
  Program loop = strengthened("1dbrw", "n", m);
  std::vector<State> part = testing::ints("n", 1, 3);
  MMInput partial;
  partial.variant = MMVariant::C;
  for (const State& s : part) partial.p_lower[s] = ExtRat(1L);
  Certificate small_dom = mciver_morgan_bound(loop, restricted_post(parse_guard("0 < n"), ex::one()),
                                              at_m("[0 < n & n <= M]*(1 - n/M)", m), partial, part);
  const SideCondition* premise = small_dom.find(ConditionKind::MM_PREMISE);
  CHECK(premise->status == Status::FAILED);
  REQUIRE(premise->witness);
  CHECK_FALSE(std::count(part.begin(), part.end(), *premise->witness));
}
