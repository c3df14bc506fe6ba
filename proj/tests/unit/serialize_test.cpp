#include <doctest.h>

#include "pgcl/eval.hpp"
#include "pgcl/region.hpp"
#include "pgcl/serialize.hpp"
#include "support.hpp"

using namespace pgcl;

namespace {

CertifyRequest walk_request() {
  CertifyRequest req;
  req.loop = testing::corpus_program("1dbrw");
  req.post = ex::one();
  req.bound = subst(parse_expectation("[n<0] + [0<=n & n<=M]*monus((1/2)^n, (1/2)^M)"), "M", arith::lit(6));
  req.spec = make_box_strengthening(req.loop->cond, {{arith::var("n"), CmpOp::Lt, arith::lit(6)}});
  req.domain = testing::ints("n", -2, 8);
  return req;
}

}  // namespace

TEST_CASE("values and tables") {
  Json half = value_json(ExtRat(Rational(1, 2)));
  CHECK(half["exact"] == "1/2");
  CHECK(half["decimal"].get<std::string>().rfind("0.5", 0) == 0);
  CHECK(value_json(ExtRat::infinity())["exact"] == "inf");

  Table t;
  t[State{{"n", 1}}] = ExtRat(Rational(1, 3));
  t[State{{"n", 2}, {"b", Rational(-1, 2)}}] = ExtRat::infinity();
  t[State{{"n", 3}}] = ExtRat(0L);
  CHECK(table_from_json(table_json(t)) == t);
  CHECK(table_from_json(Json::parse(table_json(t).dump())) == t);
}

TEST_CASE("rationals from JSON") {
  CHECK(rational_from_json(Json(3)) == 3);
  CHECK(rational_from_json(Json("1/3")) == Rational(1, 3));
  CHECK(rational_from_json(Json("0.001")) == Rational(1, 1000));
  CHECK(rational_from_json(Json("-0.5")) == Rational(-1, 2));
  CHECK_THROWS(rational_from_json(Json::array()));
}

TEST_CASE("placeholders") {
  std::map<std::string, Rational> params{{"M", Rational(10)}};
  CHECK(fill_placeholders("n=-2..{M+2}", params) == "n=-2..12");
  CHECK(fill_placeholders("x=-{M}..{M}", params) == "x=-10..10");
  CHECK(fill_placeholders("b=1..{2*M}", params) == "b=1..20");
  CHECK(fill_placeholders("n=0..5", params) == "n=0..5");
  CHECK_THROWS(fill_placeholders("n=0..{K}", params));
}

TEST_CASE("strengthening templates") {
  Json j = Json::parse(R"({"bounds": [{"var": "n", "op": "<", "c": "M"}],
                           "sweep": {"param": "M", "values": [5, 10, 20, 40]}})");
  StrengthenTemplate t = template_from_json(j);
  StrengthenSpec s = t.instantiate(parse_guard("0 < n"), "M", 10);
  CHECK(eval_guard(s.resulting, State{{"n", 9}}));
  CHECK_FALSE(eval_guard(s.resulting, State{{"n", 10}}));
  CHECK(sweep_param(j) == "M");
  CHECK(sweep_values(j) == std::vector<Rational>{5, 10, 20, 40});

  Json range = Json::parse(R"({"sweep": {"param": "M", "from": 2, "to": 8, "step": 2}})");
  CHECK(sweep_values(range) == std::vector<Rational>{2, 4, 6, 8});
  Json geo = Json::parse(R"({"sweep": {"param": "M", "from": 2, "to": 16, "factor": 2}})");
  CHECK(sweep_values(geo) == std::vector<Rational>{2, 4, 8, 16});

  Json abs = Json::parse(R"js({"bounds": [{"expr": "abs(x)", "op": "<", "c": 3}], "conjuncts": ["x != 1"]})js");
  StrengthenSpec cube = template_from_json(abs).instantiate(parse_guard("x != 0"), "M", 0);
  CHECK(eval_guard(cube.resulting, State{{"x", -2}}));
  CHECK_FALSE(eval_guard(cube.resulting, State{{"x", 1}}));
  CHECK_FALSE(eval_guard(cube.resulting, State{{"x", 3}}));
}

TEST_CASE("requests round-trip") {
  CertifyRequest req = walk_request();
  req.options.ast_n = 5;
  req.options.ui.sup_c = Rational(2);
  req.budget.max_states = 1234;
  Json j = request_json(req);
  CertifyRequest back = request_from_json(Json::parse(j.dump()));
  CHECK(request_json(back) == j);
  CHECK(equal(back.loop, req.loop));
  CHECK(back.domain == req.domain);
  CHECK(back.budget.max_states == 1234);
  REQUIRE(back.options.ast_n);
  CHECK(*back.options.ast_n == 5);
}

TEST_CASE("certificates replay to the same document") {
  for (InnerRule inner : {InnerRule::HARK, InnerRule::MM, InnerRule::EXACT_SOLVE}) {
    CertifyRequest req = walk_request();
    req.inner = inner;
    if (inner == InnerRule::MM) {
      req.bound = parse_expectation("[n <= 0]");
    }
    CAPTURE(inner_rule_name(inner));
    Json cert = certificate_json(certify_lower_bound(req), req);
    Replay r = replay_certificate(Json::parse(cert.dump(2)));
    CHECK(r.matches);
    CHECK(r.detail.empty());
  }
}

TEST_CASE("a tampered certificate does not replay") {
  CertifyRequest req = walk_request();
  Json cert = certificate_json(certify_lower_bound(req), req);
  REQUIRE(cert["verdict"] == "CERTIFIED");
  Json forged = cert;
  forged["verdict"] = "FAILED";
  Replay r = replay_certificate(forged);
  CHECK_FALSE(r.matches);
  CHECK(r.detail.find("verdict") != std::string::npos);

  // Swapping in a bound that is too large changes the outcome.
  Json bigger = cert;
  bigger["request"]["bound"]["expr"] = "[n<0] + [0<=n & n<=6]*((1/2)^n + (1/2)^6)";
  CHECK_FALSE(replay_certificate(bigger).matches);
}

TEST_CASE("side conditions serialize their evidence in order") {
  SideCondition c;
  c.kind = ConditionKind::AST_WITNESS;
  c.status = Status::VERIFIED;
  c.message = "ok";
  c.add("N", "3");
  c.add("p", "1/2");
  c.witness = State{{"n", 1}};
  Json j = condition_json(c);
  CHECK(j["kind"] == "AST_WITNESS");
  CHECK(j["status"] == "VERIFIED");
  auto it = j["evidence"].begin();
  CHECK(it.key() == "N");
  ++it;
  CHECK(it.key() == "p");
}
