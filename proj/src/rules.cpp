#include "pgcl/rules.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "pgcl/errors.hpp"
#include "pgcl/eval.hpp"
#include "pgcl/interval.hpp"
#include "pgcl/syntax.hpp"

namespace pgcl {

// ---------------------------------------------------------------------------
// Names

const char* status_name(Status s) {
  switch (s) {
    case Status::VERIFIED: return "VERIFIED";
    case Status::VERIFIED_ON_DOMAIN: return "VERIFIED_ON_DOMAIN";
    case Status::REPORTED_UNCHECKED: return "REPORTED_UNCHECKED";
    case Status::FAILED: return "FAILED";
    case Status::UNKNOWN: return "UNKNOWN";
  }
  return "?";
}

Status parse_status(const std::string& name) {
  for (Status s : {Status::VERIFIED, Status::VERIFIED_ON_DOMAIN, Status::REPORTED_UNCHECKED, Status::FAILED,
                   Status::UNKNOWN}) {
    if (name == status_name(s)) return s;
  }
  throw Error("unknown status '" + name + "'");
}

namespace {
constexpr ConditionKind kAllKinds[] = {
    ConditionKind::SUBINVARIANT, ConditionKind::SUPERINVARIANT, ConditionKind::AST_WITNESS,
    ConditionKind::BOUNDED_F,    ConditionKind::UI_LOOPTIME_BOUNDED, ConditionKind::UI_CDB,
    ConditionKind::UI_BOUNDED,   ConditionKind::UI_BOUNDED_UPDATE_POLY, ConditionKind::GUARD_IMPLIES,
    ConditionKind::BOUNDED_UPDATE, ConditionKind::BOUNDED_L, ConditionKind::BOUNDARY,
    ConditionKind::MM_PREMISE,   ConditionKind::BOUND_CHECK};
}  // namespace

const char* kind_name(ConditionKind k) {
  switch (k) {
    case ConditionKind::SUBINVARIANT: return "SUBINVARIANT";
    case ConditionKind::SUPERINVARIANT: return "SUPERINVARIANT";
    case ConditionKind::AST_WITNESS: return "AST_WITNESS";
    case ConditionKind::BOUNDED_F: return "BOUNDED_F";
    case ConditionKind::UI_LOOPTIME_BOUNDED: return "UI_LOOPTIME_BOUNDED";
    case ConditionKind::UI_CDB: return "UI_CDB";
    case ConditionKind::UI_BOUNDED: return "UI_BOUNDED";
    case ConditionKind::UI_BOUNDED_UPDATE_POLY: return "UI_BOUNDED_UPDATE_POLY";
    case ConditionKind::GUARD_IMPLIES: return "GUARD_IMPLIES";
    case ConditionKind::BOUNDED_UPDATE: return "BOUNDED_UPDATE";
    case ConditionKind::BOUNDED_L: return "BOUNDED_L";
    case ConditionKind::BOUNDARY: return "BOUNDARY";
    case ConditionKind::MM_PREMISE: return "MM_PREMISE";
    case ConditionKind::BOUND_CHECK: return "BOUND_CHECK";
  }
  return "?";
}

ConditionKind parse_kind(const std::string& name) {
  for (ConditionKind k : kAllKinds) {
    if (name == kind_name(k)) return k;
  }
  throw Error("unknown side condition '" + name + "'");
}

const char* rule_name(Rule r) {
  switch (r) {
    case Rule::PARK_UPPER: return "PARK_UPPER";
    case Rule::HARK_LOWER: return "HARK_LOWER";
    case Rule::MM_LOWER: return "MM_LOWER";
    case Rule::GUARD_STRENGTHEN: return "GUARD_STRENGTHEN";
  }
  return "?";
}

Rule parse_rule(const std::string& name) {
  for (Rule r : {Rule::PARK_UPPER, Rule::HARK_LOWER, Rule::MM_LOWER, Rule::GUARD_STRENGTHEN}) {
    if (name == rule_name(r)) return r;
  }
  throw Error("unknown rule '" + name + "'");
}

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::CERTIFIED: return "CERTIFIED";
    case Verdict::FAILED: return "FAILED";
    case Verdict::UNKNOWN: return "UNKNOWN";
  }
  return "?";
}

const char* inner_rule_name(InnerRule r) {
  switch (r) {
    case InnerRule::HARK: return "HARK";
    case InnerRule::MM: return "MM";
    case InnerRule::EXACT_SOLVE: return "EXACT_SOLVE";
  }
  return "?";
}

InnerRule parse_inner_rule(const std::string& name) {
  for (InnerRule r : {InnerRule::HARK, InnerRule::MM, InnerRule::EXACT_SOLVE}) {
    if (name == inner_rule_name(r)) return r;
  }
  throw Error("unknown inner rule '" + name + "' (expected HARK, MM or EXACT_SOLVE)");
}

const std::string* SideCondition::get(const std::string& key) const {
  for (const auto& [k, v] : evidence) {
    if (k == key) return &v;
  }
  return nullptr;
}

const SideCondition* Certificate::find(ConditionKind k) const {
  for (const SideCondition& c : conditions) {
    if (c.kind == k) return &c;
  }
  return nullptr;
}

Status invariant_status(Direction d, bool holds, bool truncated) {
  if (d == Direction::SUPER) {
    // A truncated Phi(u) is only a lower bound: exceeding u still refutes,
    // staying below u proves nothing.
    if (!holds) return Status::FAILED;
    return truncated ? Status::REPORTED_UNCHECKED : Status::VERIFIED_ON_DOMAIN;
  }
  // Lower bounds on Phi(l) above l still witness l <= Phi(l).
  if (holds) return Status::VERIFIED_ON_DOMAIN;
  return truncated ? Status::REPORTED_UNCHECKED : Status::FAILED;
}

ValueFn Bound::fn() const { return table ? tabulated(*table) : closed_form(expr); }

std::string Bound::text() const {
  if (table) return "table of " + std::to_string(table->size()) + " states";
  return pretty_print(expr);
}

namespace {

bool is_const(const Bound& b, bool infinite) {
  if (b.table || b.expr->op != ExpOp::Const) return false;
  return infinite ? b.expr->value.is_infinite() : b.expr->value.is_zero();
}

SideCondition make(ConditionKind kind, Status status, std::string message) {
  SideCondition c;
  c.kind = kind;
  c.status = status;
  c.message = std::move(message);
  return c;
}

SideCondition failed_from(ConditionKind kind, const std::exception& e) {
  return make(kind, Status::FAILED, e.what());
}

SideCondition check_invariant(Direction dir, const Program& loop, const Expectation& f, const Bound& h,
                              const std::vector<State>& domain, const Budget& budget) {
  ConditionKind kind = dir == Direction::SUPER ? ConditionKind::SUPERINVARIANT : ConditionKind::SUBINVARIANT;
  CharFn phi = char_fn(loop, f);
  StepEngine engine(budget);
  ValueFn value = h.fn();
  bool truncated = false;
  std::optional<State> refuted;         // violation that is decisive
  std::optional<State> weak;            // violation on a truncated evaluation
  ExtRat phi_at;
  ExtRat h_at;
  std::size_t tight = 0;
  for (const State& s : domain) {
    Applied a = char_fn_apply(phi, value, s, engine);
    ExtRat hs = value(s);
    truncated = truncated || a.truncated;
    bool ok = dir == Direction::SUPER ? a.value <= hs : hs <= a.value;
    if (a.value == hs) ++tight;
    if (ok) continue;
    bool decisive = dir == Direction::SUPER || !a.truncated;
    if (decisive && !refuted) {
      refuted = s;
      phi_at = a.value;
      h_at = hs;
    } else if (!decisive && !weak) {
      weak = s;
    }
  }
  Status status = invariant_status(dir, !refuted && !weak, truncated);
  if (!refuted && weak) status = Status::REPORTED_UNCHECKED;
  const char* name = dir == Direction::SUPER ? "Phi(u) <= u" : "l <= Phi(l)";
  SideCondition c = make(kind, status, "");
  c.add("states", std::to_string(domain.size()));
  c.add("tight_states", std::to_string(tight));
  c.add("truncated", truncated ? "true" : "false");
  if (refuted) {
    c.witness = refuted;
    c.message = std::string(name) + " fails at " + refuted->str();
    c.add("phi", phi_at.str());
    c.add(dir == Direction::SUPER ? "u" : "l", h_at.str());
  } else if (weak) {
    c.witness = weak;
    c.message = std::string(name) + " not confirmed at " + weak->str() + " (truncated evaluation)";
  } else if (truncated) {
    c.message = std::string(name) + " holds against truncated evaluations only";
  } else {
    c.message = std::string(name) + " holds on the domain";
  }
  return c;
}

std::set<State> as_set(const std::vector<State>& domain) { return {domain.begin(), domain.end()}; }

}  // namespace

SideCondition check_superinvariant(const Program& loop, const Expectation& f, const Bound& u,
                                   const std::vector<State>& domain, const Budget& budget) {
  if (is_const(u, true)) {
    SideCondition c = make(ConditionKind::SUPERINVARIANT, Status::VERIFIED, "u = inf is the greatest expectation");
    c.add("u", "inf");
    return c;
  }
  return check_invariant(Direction::SUPER, loop, f, u, domain, budget);
}

SideCondition check_subinvariant(const Program& loop, const Expectation& f, const Bound& l,
                                 const std::vector<State>& domain, const Budget& budget) {
  if (is_const(l, false)) {
    SideCondition c = make(ConditionKind::SUBINVARIANT, Status::VERIFIED, "l = 0 is the least expectation");
    c.add("l", "0");
    return c;
  }
  return check_invariant(Direction::SUB, loop, f, l, domain, budget);
}

// ---------------------------------------------------------------------------
// AST witness

namespace {

constexpr unsigned kSymbolicDepth = 6;

// E_k = wp(body, [!g] + [g] * E_{k-1}) is the probability of exiting within
// k iterations. Its interval infimum over the guard region bounds every guard
// state at once. Returns (k, 1 - inf E_k) for the first k with a positive
// infimum.
std::optional<std::pair<unsigned, Rational>> symbolic_ast_bound(const Program& loop, unsigned limit) {
  const Program& body = loop->children[0];
  if (!is_loop_free(body) || has_continuous(body)) return std::nullopt;
  const Guard& g = loop->cond;
  Box region = refine(Box{}, g);
  if (region.empty()) return std::nullopt;
  Expectation exit = ex::iverson(guard::negate(g));
  Expectation e = ex::zero();
  for (unsigned k = 1; k <= std::min(limit, kSymbolicDepth); ++k) {
    e = wp_symbolic(body, ex::add(exit, ex::mul_iverson(g, e)));
    Rational lo = eval_range(e, region).lo;
    if (sgn(lo) > 0) return std::make_pair(k, lo >= 1 ? Rational(0) : Rational(1 - lo));
  }
  return std::nullopt;
}

}  // namespace

SideCondition check_ast_witness(const Program& loop, std::optional<unsigned> n, const std::vector<State>& domain,
                                const Budget& budget, unsigned n_max) {
  if (loop->kind != StmtKind::While) throw Error("AST witness needs a while loop");
  const Guard& g = loop->cond;
  std::set<State> in_domain = as_set(domain);
  StepEngine engine(budget);

  // Guard states of the domain closed under guard-satisfying successors,
  // with their one-step rows. The closure keeps the bound meaningful for
  // every state a domain run can visit.
  std::map<State, std::size_t> index;
  std::vector<State> states;
  auto intern = [&](const State& s) {
    auto [it, fresh] = index.emplace(s, states.size());
    if (fresh) states.push_back(s);
    return it->second;
  };
  for (const State& s : in_domain) {
    if (eval_guard(g, s)) intern(s);
  }
  std::size_t from_domain = states.size();
  struct Row {
    Rational exit = 0;
    std::vector<std::pair<std::size_t, Rational>> next;
  };
  std::vector<Row> rows;
  bool truncated = false;
  for (std::size_t i = 0; i < states.size(); ++i) {
    SubDistribution d = engine.step(loop->children[0], states[i]);
    if (sgn(d.truncated_mass) > 0) truncated = true;
    Rational missing = 1 - d.total_mass - d.truncated_mass;
    if (sgn(missing) > 0) {
      SideCondition c = make(ConditionKind::AST_WITNESS, Status::FAILED,
                             "loop body diverges with probability " + to_string(missing) + " at " + states[i].str());
      c.witness = states[i];
      c.add("p", "1");
      c.add("body_divergence", to_string(missing));
      return c;
    }
    Row row;
    for (const auto& [t, w] : d.outcomes) {
      if (!eval_guard(g, t)) {
        row.exit += w;
      } else if (index.count(t) || states.size() < budget.max_states) {
        row.next.emplace_back(intern(t), w);
      } else {
        // Beyond the budget the mass is dropped, which only lowers q.
        truncated = true;
      }
    }
    rows.push_back(std::move(row));
  }

  SideCondition c = make(ConditionKind::AST_WITNESS, Status::UNKNOWN, "");
  if (states.empty()) {
    c.status = Status::VERIFIED;
    c.message = "no domain state satisfies the guard";
    c.add("N", "0");
    c.add("p", "0");
    return c;
  }

  if (truncated) {
    // The closure is incomplete, so states outside it are not covered.
    // Fall back to a bound that holds on the whole guard region.
    if (auto sym = symbolic_ast_bound(loop, n ? *n : n_max)) {
      c.status = Status::VERIFIED;
      c.add("method", "symbolic");
      c.add("N", std::to_string(sym->first));
      c.add("p", to_string(sym->second));
      c.add("p_decimal", to_decimal(sym->second, 12));
      c.message = "P(T > " + std::to_string(sym->first) + ") <= " + to_decimal(sym->second, 12) +
                  " on every guard state (symbolic unrolling)";
      return c;
    }
    c.status = Status::UNKNOWN;
    c.message = "closure of the domain exceeded the state budget";
    c.add("closure_states", std::to_string(states.size()));
    c.add("truncated", "true");
    return c;
  }

  // q[i] = P(exit within k steps)
  std::vector<Rational> q(states.size(), Rational(0));
  unsigned limit = n ? *n : n_max;
  Rational worst = 1;
  std::size_t argworst = 0;
  unsigned k = 0;
  auto evaluate = [&] {
    worst = 0;
    argworst = 0;
    for (std::size_t i = 0; i < states.size(); ++i) {
      Rational tail = 1 - q[i];
      if (tail > worst) {
        worst = tail;
        argworst = i;
      }
    }
  };
  evaluate();
  while (k < limit && (n || worst == 1)) {
    std::vector<Rational> next(states.size());
    for (std::size_t i = 0; i < states.size(); ++i) {
      Rational v = rows[i].exit;
      for (const auto& [j, w] : rows[i].next) v += w * q[j];
      next[i] = std::move(v);
    }
    q = std::move(next);
    ++k;
    evaluate();
  }
  c.add("N", std::to_string(k));
  c.add("p", to_string(worst));
  c.add("p_decimal", to_decimal(worst, 12));
  c.add("worst_state", states[argworst].str());
  c.add("closure_states", std::to_string(states.size()));
  c.add("outside_domain", std::to_string(states.size() - from_domain));
  c.add("truncated", "false");
  if (worst < 1) {
    c.status = Status::VERIFIED;
    c.message = "P(T > " + std::to_string(k) + ") <= " + to_decimal(worst, 12) + " on the reachable closure of the domain";
  } else {
    c.status = Status::FAILED;
    c.witness = states[argworst];
    c.message = "from " + states[argworst].str() + " the loop cannot exit within " + std::to_string(k) + " steps";
  }
  return c;
}

// ---------------------------------------------------------------------------
// Bounded update

namespace {

using Delta = std::map<std::string, Rational>;

struct TooMany {};
struct NotBounded {
  std::string why;
};

constexpr std::size_t kMaxPaths = 10000;

// x := x + c with c constant; returns c.
std::optional<Rational> shift_of(const std::string& x, const Arith& e) {
  if (e->op == ArithOp::Var && e->name == x) return Rational(0);
  if (e->op == ArithOp::Add || e->op == ArithOp::Sub) {
    Rational sign = e->op == ArithOp::Add ? 1 : -1;
    if (is_constant(e->rhs)) {
      auto inner = shift_of(x, e->lhs);
      if (inner) return *inner + sign * eval_constant(e->rhs);
    }
    if (e->op == ArithOp::Add && is_constant(e->lhs)) {
      auto inner = shift_of(x, e->rhs);
      if (inner) return *inner + eval_constant(e->lhs);
    }
  }
  return std::nullopt;
}

std::vector<Delta> paths(const Program& c, std::vector<Delta> in) {
  auto check = [](const std::vector<Delta>& v) {
    if (v.size() > kMaxPaths) throw TooMany{};
  };
  switch (c->kind) {
    case StmtKind::Skip:
      return in;
    case StmtKind::Assign: {
      auto k = shift_of(c->var, c->expr);
      if (!k) throw NotBounded{"assignment " + c->var + " := " + pretty_print(c->expr) + " is not a constant shift"};
      for (Delta& d : in) d[c->var] += *k;
      return in;
    }
    case StmtKind::RandomAssign: {
      if (c->dist.continuous) throw NotBounded{"continuous sampling of " + c->var};
      std::vector<Delta> out;
      for (const auto& [w, value] : c->dist.outcomes) {
        auto k = shift_of(c->var, value);
        if (!k) throw NotBounded{"sampled value " + pretty_print(value) + " is not a constant shift of " + c->var};
        for (Delta d : in) {
          d[c->var] += *k;
          out.push_back(std::move(d));
        }
        check(out);
      }
      return out;
    }
    case StmtKind::Seq:
      for (const Program& p : c->children) in = paths(p, std::move(in));
      return in;
    case StmtKind::ProbChoice:
    case StmtKind::UniformChoice:
    case StmtKind::If: {
      std::vector<Delta> out;
      for (const Program& p : c->children) {
        std::vector<Delta> part = paths(p, in);
        out.insert(out.end(), part.begin(), part.end());
        check(out);
      }
      return out;
    }
    case StmtKind::While:
      throw NotBounded{"the body contains a loop"};
  }
  throw Error("corrupt program");
}

}  // namespace

SideCondition detect_bounded_update(const Program& loop) {
  const Program& body = loop->kind == StmtKind::While ? loop->children[0] : loop;
  try {
    std::vector<Delta> all = paths(body, {Delta{}});
    Rational c = 0;
    for (const Delta& d : all) {
      Rational total = 0;
      for (const auto& [x, k] : d) total += abs(k);
      c = std::max(c, total);
    }
    SideCondition r = make(ConditionKind::BOUNDED_UPDATE, Status::VERIFIED,
                           "every path changes the state by at most " + to_string(c));
    r.add("c", to_string(c));
    r.add("paths", std::to_string(all.size()));
    return r;
  } catch (const TooMany&) {
    return make(ConditionKind::BOUNDED_UPDATE, Status::UNKNOWN,
                "more than " + std::to_string(kMaxPaths) + " paths through the body");
  } catch (const NotBounded& e) {
    return make(ConditionKind::BOUNDED_UPDATE, Status::UNKNOWN, e.why);
  }
}

// ---------------------------------------------------------------------------
// Piecewise polynomials

namespace {

bool polynomial(const Arith& e) {
  switch (e->op) {
    case ArithOp::Lit:
    case ArithOp::Var:
      return true;
    case ArithOp::Neg:
    case ArithOp::Abs:
    case ArithOp::Floor:
      return polynomial(e->lhs);
    case ArithOp::Add:
    case ArithOp::Sub:
    case ArithOp::Mul:
    case ArithOp::Min:
    case ArithOp::Max:
      return polynomial(e->lhs) && polynomial(e->rhs);
    case ArithOp::Div:
      return polynomial(e->lhs) && is_constant(e->rhs);
    case ArithOp::Pow: {
      if (!is_constant(e->rhs)) return false;
      Rational k = eval_constant(e->rhs);
      return is_integer(k) && sgn(k) >= 0 && polynomial(e->lhs);
    }
  }
  return false;
}

}  // namespace

bool is_piecewise_polynomial(const Expectation& f) {
  switch (f->op) {
    case ExpOp::Const:
      return f->value.is_finite();
    case ExpOp::Term:
      return polynomial(f->term);
    case ExpOp::Iverson:
      return true;
    case ExpOp::Add:
    case ExpOp::Mul:
    case ExpOp::Min:
    case ExpOp::Max:
    case ExpOp::Monus:
      return is_piecewise_polynomial(f->a) && is_piecewise_polynomial(f->b);
  }
  return false;
}

// ---------------------------------------------------------------------------
// Uniform integrability

namespace {

struct Peak {
  ExtRat value = ExtRat(0L);
  std::optional<State> at;
};

Peak peak(const Expectation& f, const std::vector<State>& states) {
  Peak p;
  for (const State& s : states) {
    ExtRat v = eval(f, s);
    if (!p.at || v > p.value) {
      p.value = v;
      p.at = s;
    }
  }
  return p;
}

std::vector<State> guard_states(const Guard& g, const std::vector<State>& domain) {
  std::vector<State> out;
  for (const State& s : domain) {
    if (eval_guard(g, s)) out.push_back(s);
  }
  return out;
}

SideCondition looptime_bounded(const MarkovChain& chain, const std::vector<State>& domain, unsigned n_max) {
  SideCondition c = make(ConditionKind::UI_LOOPTIME_BOUNDED, Status::UNKNOWN, "");
  std::vector<std::size_t> watch;
  for (const State& s : domain) {
    auto i = chain.find(s);
    if (i && chain.transient[*i]) watch.push_back(*i);
  }
  // q[i] = P(absorbed within k steps from i)
  std::vector<Rational> q(chain.size(), Rational(0));
  for (std::size_t i = 0; i < chain.size(); ++i) {
    if (!chain.transient[i]) q[i] = 1;
  }
  auto done = [&] {
    return std::all_of(watch.begin(), watch.end(), [&](std::size_t i) { return q[i] == 1; });
  };
  unsigned k = 0;
  while (!done() && k < n_max) {
    std::vector<Rational> next = q;
    for (std::size_t i = 0; i < chain.size(); ++i) {
      if (!chain.transient[i]) continue;
      Rational v = 0;
      for (const auto& [j, w] : chain.rows[i]) v += w * q[j];
      next[i] = std::move(v);
    }
    q = std::move(next);
    ++k;
  }
  if (done()) {
    c.status = Status::VERIFIED_ON_DOMAIN;
    c.message = "every domain run leaves the loop within " + std::to_string(k) + " iterations";
    c.add("N", std::to_string(k));
    c.add("wp_iterates", "finite: the body is evaluated exactly on a finite chain");
    return c;
  }
  std::size_t worst = watch.front();
  for (std::size_t i : watch) {
    if (q[i] < q[worst]) worst = i;
  }
  c.witness = chain.states[worst];
  c.add("N_max", std::to_string(n_max));
  c.add("tail_decimal", to_decimal(1 - q[worst], 12));
  if (chain.truncated) {
    c.message = "no bound up to " + std::to_string(n_max) + " under a truncated chain";
    return c;
  }
  c.status = Status::FAILED;
  c.message = "from " + chain.states[worst].str() + " the loop may run longer than " + std::to_string(n_max) +
              " iterations";
  return c;
}

constexpr const char* kFrozenPrefix = "__at_";

SideCondition difference_bounded(const Program& loop, const Expectation& l, const MarkovChain& chain,
                                 const std::vector<State>& domain, const UiOptions& options) {
  SideCondition c = make(ConditionKind::UI_CDB, Status::UNKNOWN, "");
  std::vector<State> inside = guard_states(loop->cond, domain);

  // Expected looping time on the explored chain.
  std::vector<ExtRat> steps = expected_steps(chain);
  ExtRat longest(0L);
  std::optional<State> longest_at;
  for (const State& s : domain) {
    auto i = chain.find(s);
    if (!i) continue;
    if (!longest_at || steps[*i] > longest) {
      longest = steps[*i];
      longest_at = s;
    }
  }
  c.add("expected_looping_time_max", longest.str());
  c.add("chain_truncated", chain.truncated ? "true" : "false");
  if (longest.is_infinite() && !chain.truncated) {
    c.status = Status::FAILED;
    c.witness = longest_at;
    c.message = "expected looping time is infinite at " + longest_at->str();
    return c;
  }

  // wp[body](|l - l(s)|), with l(s) frozen through renamed variables.
  std::vector<std::string> vars;
  collect_vars(l, vars);
  std::sort(vars.begin(), vars.end());
  vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
  Expectation frozen = l;
  for (const std::string& x : vars) frozen = subst(frozen, x, arith::var(kFrozenPrefix + x));
  Expectation spread = ex::add(ex::monus(l, frozen), ex::monus(frozen, l));
  Expectation delta;
  try {
    delta = wp_symbolic(loop->children[0], spread);
  } catch (const Unsupported& e) {
    c.message = std::string("conditional difference not computable: ") + e.what();
    return c;
  }
  for (const std::string& x : vars) delta = subst(delta, kFrozenPrefix + x, arith::var(x));
  c.add("delta", pretty_print(delta));

  ExpRange range = eval_range(delta, refine(Box{}, loop->cond));
  if (range.hi) {
    c.status = Status::REPORTED_UNCHECKED;
    c.add("c", to_string(*range.hi));
    c.message = "conditionally difference bounded by " + to_string(*range.hi) +
                "; finiteness of the expected looping time is checked on the explored chain only";
    return c;
  }
  Peak top = peak(delta, inside);
  if (top.at) {
    c.add("delta_max_on_domain", top.value.str());
    c.add("delta_argmax", top.at->str());
  }
  if (options.cdb_c) {
    c.add("c", to_string(*options.cdb_c));
    if (!top.at || top.value <= ExtRat(*options.cdb_c)) {
      c.status = Status::REPORTED_UNCHECKED;
      c.message = "difference bounded by the given constant on the domain";
    } else {
      c.status = Status::FAILED;
      c.witness = top.at;
      c.message = "difference " + top.value.str() + " exceeds the given constant at " + top.at->str();
    }
    return c;
  }
  c.status = Status::FAILED;
  c.witness = top.at;
  c.message = "no constant bounds the conditional difference";
  return c;
}

SideCondition bounded(const Expectation& l, const std::vector<State>& domain, const UiOptions& options) {
  SideCondition c = make(ConditionKind::UI_BOUNDED, Status::UNKNOWN, "");
  Peak top = peak(l, domain);
  if (top.at) {
    c.add("sup_domain", top.value.str());
    c.add("argmax", top.at->str());
  }
  ExpRange range = eval_range(l, Box{});
  if (range.hi) {
    c.status = Status::VERIFIED;
    c.add("c", to_string(*range.hi));
    c.message = "bounded by " + to_string(*range.hi) + " everywhere";
    return c;
  }
  if (options.sup_c) {
    c.add("c", to_string(*options.sup_c));
    if (!top.at || top.value <= ExtRat(*options.sup_c)) {
      c.status = Status::VERIFIED_ON_DOMAIN;
      c.message = "bounded by the given constant on the domain";
      return c;
    }
  }
  c.status = Status::FAILED;
  c.witness = top.at;
  c.message = "no finite bound found";
  return c;
}

SideCondition update_poly(const Program& loop, const Expectation& l) {
  SideCondition bu = detect_bounded_update(loop);
  bool poly = is_piecewise_polynomial(l);
  SideCondition c = make(ConditionKind::UI_BOUNDED_UPDATE_POLY, Status::UNKNOWN, "");
  c.add("bounded_update", status_name(bu.status));
  if (const std::string* k = bu.get("c")) c.add("c", *k);
  c.add("piecewise_polynomial", poly ? "true" : "false");
  if (passes(bu.status) && poly) {
    c.status = Status::VERIFIED;
    c.message = "bounded update and piecewise polynomial bound";
  } else {
    c.message = !passes(bu.status) ? bu.message : "bound is not piecewise polynomial";
  }
  return c;
}

}  // namespace

std::vector<SideCondition> ui_report(const Program& loop, const Expectation& l, const std::vector<State>& domain,
                                     const Budget& budget, const UiOptions& options) {
  std::vector<SideCondition> out;
  std::optional<MarkovChain> chain;
  std::string chain_error;
  try {
    chain = explore(loop, domain, budget);
  } catch (const Error& e) {
    chain_error = e.what();
  }
  if (chain) {
    out.push_back(looptime_bounded(*chain, domain, options.n_max));
    try {
      out.push_back(difference_bounded(loop, l, *chain, domain, options));
    } catch (const Error& e) {
      out.push_back(make(ConditionKind::UI_CDB, Status::UNKNOWN, e.what()));
    }
  } else {
    out.push_back(make(ConditionKind::UI_LOOPTIME_BOUNDED, Status::UNKNOWN, chain_error));
    out.push_back(make(ConditionKind::UI_CDB, Status::UNKNOWN, chain_error));
  }
  try {
    out.push_back(bounded(l, domain, options));
  } catch (const Error& e) {
    out.push_back(make(ConditionKind::UI_BOUNDED, Status::UNKNOWN, e.what()));
  }
  out.push_back(update_poly(loop, l));
  return out;
}

// ---------------------------------------------------------------------------
// Certificates

namespace {

bool is_ui(ConditionKind k) {
  return k == ConditionKind::UI_LOOPTIME_BOUNDED || k == ConditionKind::UI_CDB || k == ConditionKind::UI_BOUNDED ||
         k == ConditionKind::UI_BOUNDED_UPDATE_POLY;
}

// Every non-u.i. condition must pass; among the u.i. criteria one suffices.
Verdict decide(const std::vector<SideCondition>& conditions) {
  bool all_pass = true;
  bool any_failed = false;
  bool has_ui = false;
  bool ui_pass = false;
  bool ui_all_failed = true;
  for (const SideCondition& c : conditions) {
    if (is_ui(c.kind)) {
      has_ui = true;
      ui_pass = ui_pass || passes(c.status);
      ui_all_failed = ui_all_failed && c.status == Status::FAILED;
      continue;
    }
    all_pass = all_pass && passes(c.status);
    any_failed = any_failed || c.status == Status::FAILED;
  }
  if (has_ui) {
    all_pass = all_pass && ui_pass;
    any_failed = any_failed || (!ui_pass && ui_all_failed);
  }
  if (all_pass) return Verdict::CERTIFIED;
  return any_failed ? Verdict::FAILED : Verdict::UNKNOWN;
}

Certificate start(Rule rule, const Program& loop, const Expectation& f, const Bound& b,
                  const std::vector<State>& domain) {
  Certificate cert;
  cert.rule = rule;
  cert.loop = pretty_print(loop);
  cert.post = pretty_print(f);
  cert.bound = b.text();
  cert.domain = domain;
  return cert;
}

SideCondition domain_sup(ConditionKind kind, const ValueFn& h, const std::vector<State>& domain, const char* name) {
  SideCondition c = make(kind, Status::VERIFIED_ON_DOMAIN, "");
  ExtRat top(0L);
  for (const State& s : domain) {
    ExtRat v = h(s);
    if (v.is_infinite()) {
      c.status = Status::FAILED;
      c.witness = s;
      c.message = std::string(name) + " is infinite at " + s.str();
      return c;
    }
    top = max(top, v);
  }
  c.add("sup", top.str());
  c.message = std::string(name) + " is bounded by " + top.str() + " on the domain";
  return c;
}

ExtRat lookup(const Table& t, const State& s) {
  auto it = t.find(s);
  if (it == t.end()) throw DomainError("no termination probability for " + s.str());
  return it->second;
}

// States reachable from the domain's guard states, exit states included.
struct Closure {
  std::vector<State> states;
  bool truncated = false;
};

Closure reachable(const Program& loop, const std::vector<State>& domain, const Budget& budget) {
  Closure out;
  std::set<State> seen;
  std::vector<State> work;
  for (const State& s : domain) {
    if (eval_guard(loop->cond, s) && seen.insert(s).second) work.push_back(s);
  }
  StepEngine engine(budget);
  for (std::size_t i = 0; i < work.size(); ++i) {
    SubDistribution d = engine.step(loop->children[0], work[i]);
    if (sgn(d.truncated_mass) > 0) out.truncated = true;
    for (const auto& [t, w] : d.outcomes) {
      if (seen.count(t)) continue;
      if (seen.size() >= budget.max_states) {
        out.truncated = true;
        return out;
      }
      seen.insert(t);
      if (eval_guard(loop->cond, t)) {
        work.push_back(t);
      } else {
        out.states.push_back(t);
      }
    }
  }
  out.states.insert(out.states.end(), work.begin(), work.end());
  return out;
}

}  // namespace

Certificate park_upper_bound(const Program& loop, const Expectation& f, const Bound& u,
                             const std::vector<State>& domain, const Budget& budget) {
  Certificate cert = start(Rule::PARK_UPPER, loop, f, u, domain);
  try {
    cert.conditions.push_back(check_superinvariant(loop, f, u, domain, budget));
  } catch (const Error& e) {
    cert.conditions.push_back(failed_from(ConditionKind::SUPERINVARIANT, e));
  }
  cert.verdict = decide(cert.conditions);
  return cert;
}

Certificate hark_lower_bound(const Program& loop, const Expectation& f, const Bound& l,
                             const std::vector<State>& domain, const Budget& budget, const CertifyOptions& options) {
  Certificate cert = start(Rule::HARK_LOWER, loop, f, l, domain);
  try {
    cert.conditions.push_back(check_subinvariant(loop, f, l, domain, budget));
  } catch (const Error& e) {
    cert.conditions.push_back(failed_from(ConditionKind::SUBINVARIANT, e));
  }
  try {
    cert.conditions.push_back(check_ast_witness(loop, options.ast_n, domain, budget, options.ast_n_max));
  } catch (const Error& e) {
    cert.conditions.push_back(failed_from(ConditionKind::AST_WITNESS, e));
  }
  if (l.table) {
    cert.conditions.push_back(
        make(ConditionKind::UI_BOUNDED, Status::UNKNOWN, "uniform integrability needs a closed-form bound"));
  } else {
    for (SideCondition& c : ui_report(loop, l.expr, domain, budget, options.ui)) cert.conditions.push_back(std::move(c));
  }
  cert.verdict = decide(cert.conditions);
  return cert;
}

Certificate mciver_morgan_bound(const Program& loop, const Expectation& f, const Bound& l, const MMInput& input,
                                const std::vector<State>& domain, const Budget& budget) {
  Certificate cert = start(Rule::MM_LOWER, loop, f, l, domain);
  ValueFn lv = l.fn();
  ValueFn fv = closed_form(f);
  cert.conditions.push_back(domain_sup(ConditionKind::BOUNDED_F, fv, domain, "f"));
  cert.conditions.push_back(domain_sup(ConditionKind::BOUNDED_L, lv, domain, "l"));
  try {
    cert.conditions.push_back(check_subinvariant(loop, f, l, domain, budget));
  } catch (const Error& e) {
    cert.conditions.push_back(failed_from(ConditionKind::SUBINVARIANT, e));
  }

  SideCondition boundary = make(ConditionKind::BOUNDARY, Status::VERIFIED_ON_DOMAIN, "[!G]*l = [!G]*f on the domain");
  for (const State& s : domain) {
    if (eval_guard(loop->cond, s)) continue;
    if (!(lv(s) == fv(s))) {
      boundary.status = Status::FAILED;
      boundary.witness = s;
      boundary.message = "l and f differ outside the guard at " + s.str();
      boundary.add("l", lv(s).str());
      boundary.add("f", fv(s).str());
      break;
    }
  }
  cert.conditions.push_back(boundary);

  SideCondition premise = make(ConditionKind::MM_PREMISE, Status::VERIFIED_ON_DOMAIN, "");
  Table conclusion;
  std::optional<Rational> eps;
  try {
    switch (input.variant) {
      case MMVariant::A:
        premise.add("variant", "a");
        premise.message = "l is an indicator on the domain";
        for (const State& s : domain) {
          ExtRat v = lv(s);
          if (!(v.is_zero() || v == ExtRat(1L))) {
            premise.status = Status::FAILED;
            premise.witness = s;
            premise.message = "l = " + v.str() + " is not 0 or 1 at " + s.str();
            break;
          }
          conclusion[s] = lookup(input.p_lower, s) * v;
        }
        break;
      case MMVariant::B: {
        premise.add("variant", "b");
        if (!input.g) throw Error("variant (b) needs a predicate");
        premise.add("G", pretty_print(*input.g));
        premise.message = "[G] <= p on the domain";
        for (const State& s : domain) {
          bool in = eval_guard(*input.g, s);
          if (in && lookup(input.p_lower, s) < ExtRat(1L)) {
            premise.status = Status::FAILED;
            premise.witness = s;
            premise.message = "p < 1 inside G at " + s.str();
            break;
          }
          conclusion[s] = in ? lv(s) : ExtRat(0L);
        }
        break;
      }
      case MMVariant::C: {
        premise.add("variant", "c");
        eps = input.epsilon;
        if (!eps) {
          for (const State& s : domain) {
            ExtRat v = lv(s);
            if (v.is_zero() || v.is_infinite()) continue;
            ExtRat p = lookup(input.p_lower, s);
            Rational ratio = p.value() / v.value();
            if (!eps || ratio < *eps) eps = ratio;
          }
          if (!eps) eps = Rational(1);
        }
        premise.add("epsilon", to_string(*eps));
        premise.message = "epsilon * l <= p on the domain";
        if (sgn(*eps) <= 0) {
          premise.status = Status::FAILED;
          premise.message = "no positive epsilon with epsilon * l <= p";
          break;
        }
        for (const State& s : domain) {
          ExtRat v = lv(s);
          if (ExtRat(*eps) * v > lookup(input.p_lower, s)) {
            premise.status = Status::FAILED;
            premise.witness = s;
            premise.message = "epsilon * l exceeds p at " + s.str();
            break;
          }
          conclusion[s] = v;
        }
        break;
      }
    }
    // p is a property of whole runs, so the premises on p must also hold at
    // every state a domain run can reach. Outside the table p counts as 0.
    if (input.variant != MMVariant::A && premise.status != Status::FAILED) {
      Closure closure = reachable(loop, domain, budget);
      std::set<State> in_domain(domain.begin(), domain.end());
      std::size_t extra = 0;
      for (const State& s : closure.states) {
        if (in_domain.count(s)) continue;
        ++extra;
        auto it = input.p_lower.find(s);
        ExtRat p = it == input.p_lower.end() ? ExtRat(0L) : it->second;
        bool ok = input.variant == MMVariant::B ? !eval_guard(*input.g, s) || p >= ExtRat(1L)
                                                : ExtRat(*eps) * lv(s) <= p;
        if (!ok) {
          premise.status = Status::FAILED;
          premise.witness = s;
          premise.message = "premise on p fails at " + s.str() + ", reachable from the domain";
          break;
        }
      }
      premise.add("closure_outside_domain", std::to_string(extra));
      if (closure.truncated && premise.status != Status::FAILED) {
        premise.status = Status::UNKNOWN;
        premise.message = "states reachable from the domain exceed the budget; the premise on p is unchecked there";
      }
    }
  } catch (const Error& e) {
    premise.status = Status::FAILED;
    premise.message = e.what();
  }
  cert.conditions.push_back(premise);
  cert.verdict = decide(cert.conditions);
  if (cert.verdict == Verdict::CERTIFIED) cert.conclusion = std::move(conclusion);
  return cert;
}

Certificate certify_lower_bound(const CertifyRequest& req) {
  Certificate cert = start(Rule::GUARD_STRENGTHEN, req.loop, req.post, req.bound, req.domain);
  Program strengthened;
  SideCondition gi = make(ConditionKind::GUARD_IMPLIES, Status::UNKNOWN, "");
  try {
    strengthened = apply_strengthening(req.loop, req.spec);
    gi.add("original", pretty_print(req.spec.base));
    gi.add("strengthened", pretty_print(req.spec.resulting));
    if (req.spec.by_construction) {
      gi.status = Status::VERIFIED;
      gi.message = "the new guard conjoins the original one";
    } else {
      Implication imp = guard_implies(req.spec.resulting, req.spec.base, req.domain);
      gi.status = imp.holds ? Status::VERIFIED_ON_DOMAIN : Status::FAILED;
      gi.witness = imp.witness;
      gi.message = imp.holds ? "the new guard implies the original one on the domain"
                             : "the new guard holds but the original does not at " + imp.witness->str();
    }
  } catch (const Error& e) {
    gi.status = Status::FAILED;
    gi.message = e.what();
  }
  cert.conditions.push_back(gi);
  if (!strengthened) {
    cert.verdict = Verdict::FAILED;
    return cert;
  }

  Expectation post = restricted_post(req.spec.base, req.post);
  auto absorb = [&](const Certificate& inner) {
    for (const SideCondition& c : inner.conditions) cert.conditions.push_back(c);
  };
  auto solve_on_domain = [&](const Expectation& reward, SolveResult& result, MarkovChain& chain) {
    chain = explore(strengthened, req.domain, req.budget);
    attach_rewards(chain, closed_form(reward));
    result = solve(chain, req.options.solve);
  };

  try {
    switch (req.inner) {
      case InnerRule::HARK:
        absorb(hark_lower_bound(strengthened, post, req.bound, req.domain, req.budget, req.options));
        break;
      case InnerRule::MM: {
        MarkovChain chain;
        SolveResult termination;
        solve_on_domain(ex::one(), termination, chain);
        MMInput input;
        input.variant = MMVariant::C;
        input.epsilon = req.options.mm_epsilon;
        for (const State& s : req.domain) input.p_lower[s] = termination.at(chain, s);
        for (std::size_t i = 0; i < chain.size(); ++i) input.p_lower.emplace(chain.states[i], termination.values[i]);
        Certificate mm = mciver_morgan_bound(strengthened, post, req.bound, input, req.domain, req.budget);
        absorb(mm);
        cert.conclusion = mm.conclusion;
        break;
      }
      case InnerRule::EXACT_SOLVE: {
        MarkovChain chain;
        SolveResult result;
        solve_on_domain(post, result, chain);
        ValueFn lv = req.bound.fn();
        SideCondition check = make(ConditionKind::BOUND_CHECK, Status::VERIFIED_ON_DOMAIN,
                                   "l is below the solved lower bound on the domain");
        check.add("method", method_name(result.method));
        check.add("states", std::to_string(chain.size()));
        check.add("truncated", result.truncated ? "true" : "false");
        Table solved;
        for (const State& s : req.domain) {
          ExtRat v = result.at(chain, s);
          solved[s] = v;
          ExtRat want = lv(s);
          if (want > v && check.status != Status::FAILED) {
            check.status = Status::FAILED;
            check.witness = s;
            check.message = "l = " + want.str() + " exceeds the solved value " + v.str() + " at " + s.str();
          }
        }
        cert.conditions.push_back(check);
        cert.conclusion = std::move(solved);
        break;
      }
    }
  } catch (const Error& e) {
    cert.conditions.push_back(failed_from(ConditionKind::BOUND_CHECK, e));
  }
  cert.verdict = decide(cert.conditions);
  if (cert.verdict != Verdict::CERTIFIED && req.inner != InnerRule::EXACT_SOLVE) cert.conclusion.reset();
  return cert;
}

}  // namespace pgcl
