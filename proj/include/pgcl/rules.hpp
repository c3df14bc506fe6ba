#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pgcl/ast.hpp"
#include "pgcl/chain.hpp"
#include "pgcl/expectation.hpp"
#include "pgcl/state.hpp"
#include "pgcl/strengthen.hpp"
#include "pgcl/wp.hpp"

namespace pgcl {

enum class Status { VERIFIED, VERIFIED_ON_DOMAIN, REPORTED_UNCHECKED, FAILED, UNKNOWN };
const char* status_name(Status s);
Status parse_status(const std::string& name);
inline bool passes(Status s) { return s == Status::VERIFIED || s == Status::VERIFIED_ON_DOMAIN; }

enum class ConditionKind {
  SUBINVARIANT,
  SUPERINVARIANT,
  AST_WITNESS,
  BOUNDED_F,
  UI_LOOPTIME_BOUNDED,
  UI_CDB,
  UI_BOUNDED,
  UI_BOUNDED_UPDATE_POLY,
  GUARD_IMPLIES,
  BOUNDED_UPDATE,
  BOUNDED_L,   // l bounded on the domain
  BOUNDARY,    // [!G]*l = [!G]*f
  MM_PREMISE,  // variant premise of the McIver-Morgan rule
  BOUND_CHECK  // l <= computed lower bound
};
const char* kind_name(ConditionKind k);
ConditionKind parse_kind(const std::string& name);

struct SideCondition {
  ConditionKind kind = ConditionKind::SUBINVARIANT;
  Status status = Status::UNKNOWN;
  std::string message;
  std::vector<std::pair<std::string, std::string>> evidence;  // ordered key/value pairs
  std::optional<State> witness;

  const std::string* get(const std::string& key) const;
  void add(std::string key, std::string value) { evidence.emplace_back(std::move(key), std::move(value)); }
};

// How a domain check turns into a status when some Phi evaluation was
// truncated (and hence only a lower bound on the true value).
enum class Direction { SUPER, SUB };
Status invariant_status(Direction d, bool holds, bool truncated);

// A candidate bound given either in closed form or as a table over the domain.
struct Bound {
  Expectation expr;
  std::optional<Table> table;

  Bound(Expectation e) : expr(std::move(e)) {}  // NOLINT
  Bound(Table t) : table(std::move(t)) {}       // NOLINT

  ValueFn fn() const;
  std::string text() const;
};

SideCondition check_superinvariant(const Program& loop, const Expectation& f, const Bound& u,
                                   const std::vector<State>& domain, const Budget& budget = {});
SideCondition check_subinvariant(const Program& loop, const Expectation& f, const Bound& l,
                                 const std::vector<State>& domain, const Budget& budget = {});

// P(T > n) <= p for every state reachable from the domain under the guard
// (VERIFIED). When that closure exceeds budget.max_states, a loop-free body
// is unrolled symbolically and bounded over the whole guard region instead;
// if that gives nothing the result is UNKNOWN. With n unset, searches the
// smallest n <= n_max with p < 1. A diverging body gives FAILED.
SideCondition check_ast_witness(const Program& loop, std::optional<unsigned> n, const std::vector<State>& domain,
                                const Budget& budget = {}, unsigned n_max = 1000);

// Syntactic: every path of the body changes variables only by constants.
// c = max over paths of the sum of absolute per-variable changes.
SideCondition detect_bounded_update(const Program& loop);

// Built from polynomial arithmetic, abs, min, max, floor and Iverson brackets,
// with constant exponents only.
bool is_piecewise_polynomial(const Expectation& f);

struct UiOptions {
  unsigned n_max = 1000;          // criterion (a) search bound
  std::optional<Rational> cdb_c;  // user constant for criterion (b)
  std::optional<Rational> sup_c;  // user constant for criterion (c)
};

// One entry per criterion: (a), (b), (c), orthogonal.
std::vector<SideCondition> ui_report(const Program& loop, const Expectation& l, const std::vector<State>& domain,
                                     const Budget& budget = {}, const UiOptions& options = {});

enum class Rule { PARK_UPPER, HARK_LOWER, MM_LOWER, GUARD_STRENGTHEN };
const char* rule_name(Rule r);
Rule parse_rule(const std::string& name);

enum class Verdict { CERTIFIED, FAILED, UNKNOWN };
const char* verdict_name(Verdict v);

enum class InnerRule { HARK, MM, EXACT_SOLVE };
const char* inner_rule_name(InnerRule r);
InnerRule parse_inner_rule(const std::string& name);

enum class MMVariant { A, B, C };

struct CertifyOptions {
  std::optional<unsigned> ast_n;
  unsigned ast_n_max = 1000;
  UiOptions ui;
  SolveOptions solve;
  std::optional<Rational> mm_epsilon;  // chosen as min p/l over the domain when unset
};

struct Certificate {
  Rule rule = Rule::GUARD_STRENGTHEN;
  Verdict verdict = Verdict::UNKNOWN;
  std::string loop;      // as checked (strengthened where applicable)
  std::string post;      // as checked
  std::string bound;
  std::vector<State> domain;
  std::vector<SideCondition> conditions;
  std::optional<Table> conclusion;  // tabulated lower bound (MM)

  const SideCondition* find(ConditionKind k) const;
};

Certificate park_upper_bound(const Program& loop, const Expectation& f, const Bound& u,
                             const std::vector<State>& domain, const Budget& budget = {});

// Subinvariance + AST witness + one uniform integrability criterion.
Certificate hark_lower_bound(const Program& loop, const Expectation& f, const Bound& l,
                             const std::vector<State>& domain, const Budget& budget = {},
                             const CertifyOptions& options = {});

struct MMInput {
  MMVariant variant = MMVariant::C;
  Table p_lower;                     // lower bound on wp[loop](1) over the domain
  std::optional<Guard> g;            // variant (b)
  std::optional<Rational> epsilon;   // variant (c); derived when unset
};

Certificate mciver_morgan_bound(const Program& loop, const Expectation& f, const Bound& l, const MMInput& input,
                                const std::vector<State>& domain, const Budget& budget = {});

// Everything needed to rerun a certification.
struct CertifyRequest {
  Program loop;
  Expectation post;
  Bound bound = Bound(ex::zero());
  StrengthenSpec spec;
  InnerRule inner = InnerRule::HARK;
  std::vector<State> domain;
  Budget budget;
  CertifyOptions options;
};

// Guard strengthening: checks the new guard implies the old one, then
// certifies l <= wp[loop']([!G]*f) with the inner rule.
Certificate certify_lower_bound(const CertifyRequest& request);

}  // namespace pgcl
