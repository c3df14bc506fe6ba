#include "pgcl/chain.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <deque>
#include <map>
#include <queue>
#include <sstream>
#include <thread>
#include <unordered_set>

#include "pgcl/errors.hpp"
#include "pgcl/eval.hpp"
#include "pgcl/syntax.hpp"

namespace pgcl {

std::optional<std::size_t> MarkovChain::find(const State& s) const {
  auto it = index.find(s);
  if (it == index.end()) return std::nullopt;
  return it->second;
}

std::size_t MarkovChain::transient_count() const {
  return static_cast<std::size_t>(std::count(transient.begin(), transient.end(), 1));
}

ExtRat SolveResult::at(const MarkovChain& chain, const State& s) const {
  auto i = chain.find(s);
  if (!i) throw DomainError("state " + s.str() + " is not part of the chain");
  return values[*i];
}

const char* method_name(Method m) {
  switch (m) {
    case Method::LINEAR_EXACT: return "LINEAR_EXACT";
    case Method::VALUE_ITER: return "VALUE_ITER";
    case Method::CERTIFIED_LOWER: return "CERTIFIED_LOWER";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Exploration

MarkovChain explore(const Program& loop, const std::vector<State>& init, StepEngine& engine, unsigned depth) {
  if (loop->kind != StmtKind::While) throw Error("explore needs a while loop");
  MarkovChain chain;
  chain.guard = loop->cond;
  chain.body = loop->children[0];
  const std::size_t limit = std::max<std::size_t>(engine.budget().max_states, 1);

  auto add = [&chain](const State& s) {
    auto [it, fresh] = chain.index.emplace(s, chain.states.size());
    if (fresh) {
      chain.states.push_back(s);
      chain.transient.push_back(eval_guard(chain.guard, s) ? 1 : 0);
      chain.expanded.push_back(0);
      chain.rows.emplace_back();
      chain.to_sink.emplace_back(0);
    }
    return it->second;
  };

  for (const State& s : init) {
    if (chain.find(s) || chain.size() < limit) {
      chain.initial.push_back(add(s));
    } else {
      throw Error("exploration budget smaller than the number of initial states");
    }
  }

  for (std::size_t i = 0; i < chain.size(); ++i) {
    if (!chain.transient[i]) continue;
    State s = chain.states[i];
    SubDistribution d;
    try {
      d = engine.step(chain.body, s, depth);
    } catch (const EvalError& e) {
      throw EvalError(std::string(e.what()) + " (while expanding " + s.str() + ")");
    }
    std::vector<std::pair<std::size_t, Rational>> row;
    Rational lost = d.truncated_mass;
    for (auto& [t, w] : d.outcomes) {
      if (chain.find(t) || chain.size() < limit) {
        row.emplace_back(add(t), w);
      } else {
        lost += w;
      }
    }
    std::sort(row.begin(), row.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    chain.rows[i] = std::move(row);
    chain.expanded[i] = 1;
    if (sgn(lost) > 0) {
      chain.to_sink[i] = lost;
      chain.truncated = true;
    }
  }
  chain.reward.assign(chain.size(), ExtRat(0L));
  return chain;
}

MarkovChain explore(const Program& loop, const std::vector<State>& init, const Budget& budget) {
  StepEngine engine(budget);
  return explore(loop, init, engine);
}

void attach_rewards(MarkovChain& chain, const ValueFn& f) {
  chain.reward.assign(chain.size(), ExtRat(0L));
  for (std::size_t i = 0; i < chain.size(); ++i) {
    if (chain.transient[i]) continue;
    try {
      chain.reward[i] = f(chain.states[i]);
    } catch (const EvalError& e) {
      throw EvalError(std::string(e.what()) + " (reward at " + chain.states[i].str() + ")");
    }
  }
}

// ---------------------------------------------------------------------------
// Exact elimination

namespace {

using SparseRow = std::unordered_map<std::size_t, Rational>;

// Solves x = A x + b where I - A is nonsingular and A is nonnegative.
// Variables are eliminated greedily by smallest fill estimate.
std::vector<Rational> eliminate(std::vector<SparseRow> rows, std::vector<Rational> b) {
  const std::size_t n = rows.size();
  std::vector<std::unordered_set<std::size_t>> preds(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& [j, a] : rows[i]) {
      if (j != i) preds[j].insert(i);
    }
  }
  std::vector<char> done(n, 0);
  auto cost = [&](std::size_t k) { return preds[k].size() * rows[k].size(); };
  using Item = std::pair<std::size_t, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  for (std::size_t k = 0; k < n; ++k) heap.emplace(cost(k), k);

  std::vector<std::size_t> order;
  order.reserve(n);
  while (!heap.empty()) {
    auto [c, k] = heap.top();
    heap.pop();
    if (done[k] || c != cost(k)) continue;

    SparseRow& rk = rows[k];
    auto self = rk.find(k);
    if (self != rk.end()) {
      Rational stay = self->second;
      rk.erase(self);
      if (stay >= 1) throw Error("internal error: singular system during elimination");
      Rational factor = 1 / (1 - stay);
      for (auto& [j, a] : rk) a *= factor;
      b[k] *= factor;
    }
    for (std::size_t i : preds[k]) {
      if (done[i]) continue;
      SparseRow& ri = rows[i];
      auto it = ri.find(k);
      if (it == ri.end()) continue;
      Rational a = std::move(it->second);
      ri.erase(it);
      for (const auto& [j, c2] : rk) {
        ri[j] += a * c2;
        if (j != i) preds[j].insert(i);
      }
      b[i] += a * b[k];
    }
    for (const auto& [j, a] : rk) preds[j].erase(k);
    done[k] = 1;
    order.push_back(k);
    for (std::size_t i : preds[k]) {
      if (!done[i]) heap.emplace(cost(i), i);
    }
    for (const auto& [j, a] : rk) {
      if (!done[j]) heap.emplace(cost(j), j);
    }
    preds[k].clear();
  }

  std::vector<Rational> x(n);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    std::size_t k = *it;
    Rational v = b[k];
    for (const auto& [j, a] : rows[k]) v += a * x[j];
    x[k] = std::move(v);
  }
  return x;
}

// Transient states from which some state in `targets` (or a state with
// to_sink mass, when include_sink) is reachable in the transition graph.
std::vector<char> can_reach(const MarkovChain& chain, const std::vector<char>& targets, bool include_sink) {
  const std::size_t n = chain.size();
  std::vector<std::vector<std::size_t>> rev(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& [j, w] : chain.rows[i]) rev[j].push_back(i);
  }
  std::vector<char> mark(n, 0);
  std::deque<std::size_t> queue;
  for (std::size_t i = 0; i < n; ++i) {
    if (targets[i] || (include_sink && sgn(chain.to_sink[i]) > 0)) {
      mark[i] = 1;
      queue.push_back(i);
    }
  }
  while (!queue.empty()) {
    std::size_t j = queue.front();
    queue.pop_front();
    for (std::size_t i : rev[j]) {
      if (!mark[i] && chain.transient[i]) {
        mark[i] = 1;
        queue.push_back(i);
      }
    }
  }
  return mark;
}

// Exact expected absorbed reward for finite rewards given per state.
std::vector<Rational> solve_finite(const MarkovChain& chain, const std::vector<Rational>& reward) {
  const std::size_t n = chain.size();
  std::vector<char> positive(n, 0);
  for (std::size_t i = 0; i < n; ++i) positive[i] = !chain.transient[i] && sgn(reward[i]) > 0;
  std::vector<char> live = can_reach(chain, positive, false);

  std::vector<std::size_t> var(n, SIZE_MAX);
  std::vector<std::size_t> members;
  for (std::size_t i = 0; i < n; ++i) {
    if (chain.transient[i] && live[i]) {
      var[i] = members.size();
      members.push_back(i);
    }
  }
  std::vector<SparseRow> rows(members.size());
  std::vector<Rational> b(members.size());
  for (std::size_t v = 0; v < members.size(); ++v) {
    for (const auto& [j, w] : chain.rows[members[v]]) {
      if (!chain.transient[j]) {
        b[v] += w * reward[j];
      } else if (var[j] != SIZE_MAX) {
        rows[v][var[j]] += w;
      }
    }
  }
  std::vector<Rational> x = eliminate(std::move(rows), std::move(b));
  std::vector<Rational> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!chain.transient[i]) {
      out[i] = reward[i];
    } else if (var[i] != SIZE_MAX) {
      out[i] = x[var[i]];
    }
  }
  return out;
}

bool has_infinite_reward(const MarkovChain& chain) {
  for (std::size_t i = 0; i < chain.size(); ++i) {
    if (!chain.transient[i] && chain.reward[i].is_infinite()) return true;
  }
  return false;
}

}  // namespace

SolveResult solve_exact(const MarkovChain& chain) {
  if (has_infinite_reward(chain)) throw InfiniteReward("exact solving needs finite rewards; use value iteration");
  std::vector<Rational> reward(chain.size());
  for (std::size_t i = 0; i < chain.size(); ++i) reward[i] = chain.reward[i].value();
  std::vector<Rational> x = solve_finite(chain, reward);
  SolveResult r;
  r.method = Method::LINEAR_EXACT;
  r.truncated = chain.truncated;
  r.values.reserve(x.size());
  for (Rational& q : x) r.values.emplace_back(std::move(q));
  return r;
}

// ---------------------------------------------------------------------------
// Value iteration

SolveResult value_iterate(const MarkovChain& chain, unsigned long max_iters, const Rational& epsilon,
                          int round_bits) {
  const std::size_t n = chain.size();
  SolveResult r;
  r.method = Method::VALUE_ITER;
  r.truncated = chain.truncated;
  std::vector<ExtRat> cur(n, ExtRat(0L));
  std::optional<Rational> residual;
  for (unsigned long k = 0; k < max_iters; ++k) {
    std::vector<ExtRat> next(n);
    bool infinite_step = false;
    Rational diff = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!chain.transient[i]) {
        next[i] = chain.reward[i];
      } else {
        ExtRat sum(0L);
        for (const auto& [j, w] : chain.rows[i]) sum += ExtRat(w) * cur[j];
        if (round_bits > 0 && sum.is_finite()) sum = ExtRat(floor_dyadic(sum.value(), round_bits));
        next[i] = std::move(sum);
      }
      if (next[i].is_infinite()) {
        if (cur[i].is_finite()) infinite_step = true;
      } else {
        Rational d = next[i].value() - cur[i].value();
        if (d > diff) diff = d;
      }
    }
    cur = std::move(next);
    r.iterations = k + 1;
    if (!infinite_step) {
      residual = diff;
      if (diff < epsilon || sgn(diff) == 0) break;
    }
  }
  r.values = std::move(cur);
  r.residual = residual;
  r.unbounded = std::any_of(r.values.begin(), r.values.end(), [](const ExtRat& v) { return v.is_infinite(); });
  return r;
}

// ---------------------------------------------------------------------------
// Certified floating-point solve

namespace {

struct FloatSystem {
  std::vector<std::size_t> members;        // chain index per unknown
  std::vector<std::size_t> var;            // unknown per chain index
  std::vector<std::vector<std::pair<std::size_t, double>>> rows;
  std::vector<double> self;
};

std::vector<double> gauss_seidel(const FloatSystem& sys, const std::vector<double>& b, unsigned long max_sweeps) {
  std::vector<double> x(b.size(), 0.0);
  for (unsigned long sweep = 0; sweep < max_sweeps; ++sweep) {
    double change = 0;
    double scale = 1;
    for (std::size_t v = 0; v < x.size(); ++v) {
      double s = b[v];
      for (const auto& [j, a] : sys.rows[v]) s += a * x[j];
      s /= 1 - sys.self[v];
      change = std::max(change, std::abs(s - x[v]));
      scale = std::max(scale, std::abs(s));
      x[v] = s;
    }
    if (change <= 1e-15 * scale) break;
  }
  return x;
}

}  // namespace

SolveResult solve_certified(const MarkovChain& chain) {
  if (has_infinite_reward(chain)) return value_iterate(chain, 100000, Rational(0), 64);
  const std::size_t n = chain.size();
  std::vector<char> positive(n, 0);
  for (std::size_t i = 0; i < n; ++i) positive[i] = !chain.transient[i] && sgn(chain.reward[i].value()) > 0;
  std::vector<char> live = can_reach(chain, positive, false);

  FloatSystem sys;
  sys.var.assign(n, SIZE_MAX);
  for (std::size_t i = 0; i < n; ++i) {
    if (chain.transient[i] && live[i]) {
      sys.var[i] = sys.members.size();
      sys.members.push_back(i);
    }
  }
  const std::size_t m = sys.members.size();
  sys.rows.resize(m);
  sys.self.assign(m, 0.0);
  std::vector<Rational> b_exact(m);
  std::vector<double> b(m), ones(m, 1.0);
  for (std::size_t v = 0; v < m; ++v) {
    for (const auto& [j, w] : chain.rows[sys.members[v]]) {
      if (!chain.transient[j]) {
        b_exact[v] += w * chain.reward[j].value();
      } else if (sys.var[j] == v) {
        sys.self[v] += to_double(w);
      } else if (sys.var[j] != SIZE_MAX) {
        sys.rows[v].emplace_back(sys.var[j], to_double(w));
      }
    }
    b[v] = to_double(b_exact[v]);
  }
  const unsigned long sweeps = 200000;
  std::vector<double> x = gauss_seidel(sys, b, sweeps);
  std::vector<double> tau = gauss_seidel(sys, ones, sweeps);

  auto assemble = [&](const std::vector<Rational>& v) {
    std::vector<ExtRat> out(n, ExtRat(0L));
    for (std::size_t i = 0; i < n; ++i) {
      if (!chain.transient[i]) out[i] = chain.reward[i];
    }
    for (std::size_t k = 0; k < m; ++k) out[sys.members[k]] = ExtRat(v[k]);
    return out;
  };

  double tau_max = 0;
  for (double t : tau) tau_max = std::max(tau_max, t);
  for (double delta = 1e-13; delta <= 1e-3; delta *= 10) {
    std::vector<Rational> v(m);
    for (std::size_t k = 0; k < m; ++k) v[k] = floor_dyadic(std::max(0.0, x[k] - delta * tau[k]), 60);
    bool ok = true;
    for (std::size_t k = 0; k < m && ok; ++k) {
      Rational phi = b_exact[k];
      for (const auto& [j, w] : chain.rows[sys.members[k]]) {
        if (chain.transient[j] && sys.var[j] != SIZE_MAX) phi += w * v[sys.var[j]];
      }
      ok = v[k] <= phi;
    }
    if (ok) {
      SolveResult r;
      r.method = Method::CERTIFIED_LOWER;
      r.truncated = chain.truncated;
      r.values = assemble(v);
      r.residual = floor_dyadic(delta * tau_max, 60) + Rational(1, 1) / Rational(mpz_class(1) << 60);
      return r;
    }
  }
  SolveResult r = value_iterate(chain, 100000, Rational(1, 1000000000) / 1000000, 64);
  r.method = Method::VALUE_ITER;
  return r;
}

SolveResult solve(const MarkovChain& chain, const SolveOptions& options) {
  switch (options.method) {
    case SolveMethod::Exact:
      return solve_exact(chain);
    case SolveMethod::Certified:
      return solve_certified(chain);
    case SolveMethod::ValueIter:
      return value_iterate(chain, options.max_iters, Rational(0), 64);
    case SolveMethod::Auto:
      break;
  }
  if (has_infinite_reward(chain)) return value_iterate(chain, options.max_iters, Rational(0), 64);
  if (chain.transient_count() <= options.exact_limit) return solve_exact(chain);
  return solve_certified(chain);
}

// ---------------------------------------------------------------------------
// Absorption and looping time

SubDistribution absorption_distribution(const MarkovChain& chain, std::size_t from) {
  SubDistribution d;
  if (!chain.transient[from]) {
    d.outcomes.emplace_back(chain.states[from], Rational(1));
    d.total_mass = 1;
    return d;
  }
  const std::size_t n = chain.size();
  std::vector<char> absorbing(n, 0);
  for (std::size_t i = 0; i < n; ++i) absorbing[i] = !chain.transient[i];
  std::vector<char> live = can_reach(chain, absorbing, true);
  if (!live[from]) return d;

  std::vector<std::size_t> var(n, SIZE_MAX);
  std::vector<std::size_t> members;
  for (std::size_t i = 0; i < n; ++i) {
    if (chain.transient[i] && live[i]) {
      var[i] = members.size();
      members.push_back(i);
    }
  }
  // Expected visits y solve y = e_from + Q^T y.
  std::vector<SparseRow> rows(members.size());
  for (std::size_t v = 0; v < members.size(); ++v) {
    for (const auto& [j, w] : chain.rows[members[v]]) {
      if (chain.transient[j] && var[j] != SIZE_MAX) rows[var[j]][v] += w;
    }
  }
  std::vector<Rational> e(members.size());
  e[var[from]] = 1;
  std::vector<Rational> y = eliminate(std::move(rows), std::move(e));

  std::map<State, Rational> out;
  for (std::size_t v = 0; v < members.size(); ++v) {
    if (sgn(y[v]) == 0) continue;
    std::size_t i = members[v];
    for (const auto& [j, w] : chain.rows[i]) {
      if (!chain.transient[j]) out[chain.states[j]] += y[v] * w;
    }
    d.truncated_mass += y[v] * chain.to_sink[i];
  }
  for (auto& [s, w] : out) {
    d.total_mass += w;
    d.outcomes.emplace_back(s, std::move(w));
  }
  return d;
}

std::vector<ExtRat> expected_steps(const MarkovChain& chain) {
  const std::size_t n = chain.size();
  std::vector<Rational> one(n);
  for (std::size_t i = 0; i < n; ++i) one[i] = chain.transient[i] ? 0 : 1;
  std::vector<Rational> absorb = solve_finite(chain, one);

  std::vector<std::size_t> var(n, SIZE_MAX);
  std::vector<std::size_t> members;
  for (std::size_t i = 0; i < n; ++i) {
    if (chain.transient[i] && absorb[i] == 1) {
      var[i] = members.size();
      members.push_back(i);
    }
  }
  std::vector<SparseRow> rows(members.size());
  std::vector<Rational> b(members.size(), Rational(1));
  for (std::size_t v = 0; v < members.size(); ++v) {
    for (const auto& [j, w] : chain.rows[members[v]]) {
      if (chain.transient[j]) rows[v][var[j]] += w;
    }
  }
  std::vector<Rational> t = eliminate(std::move(rows), std::move(b));
  std::vector<ExtRat> out(n, ExtRat(0L));
  for (std::size_t i = 0; i < n; ++i) {
    if (!chain.transient[i]) continue;
    out[i] = var[i] == SIZE_MAX ? ExtRat::infinity() : ExtRat(t[var[i]]);
  }
  return out;
}

LoopingTimeProfile looping_time_profile(const MarkovChain& chain, unsigned n) {
  const std::size_t size = chain.size();
  LoopingTimeProfile p;
  p.tail.assign(size, std::vector<Rational>(n + 1));
  // absorbed[i] = probability of having left the guard within k steps
  std::vector<Rational> absorbed(size);
  for (std::size_t i = 0; i < size; ++i) absorbed[i] = chain.transient[i] ? 0 : 1;
  for (unsigned k = 0;; ++k) {
    for (std::size_t i = 0; i < size; ++i) p.tail[i][k] = 1 - absorbed[i];
    if (k == n) break;
    std::vector<Rational> next(size);
    for (std::size_t i = 0; i < size; ++i) {
      if (!chain.transient[i]) {
        next[i] = 1;
        continue;
      }
      for (const auto& [j, w] : chain.rows[i]) next[i] += w * absorbed[j];
    }
    absorbed = std::move(next);
  }
  return p;
}

std::string dump(const MarkovChain& chain) {
  std::ostringstream out;
  std::size_t transitions = 0;
  for (std::size_t i = 0; i < chain.size(); ++i) {
    transitions += chain.rows[i].size() + (sgn(chain.to_sink[i]) > 0 ? 1 : 0);
  }
  out << "pgcl-chain 1\n";
  out << "guard " << pretty_print(chain.guard) << "\n";
  out << "states " << chain.size() << "\n";
  for (std::size_t i = 0; i < chain.size(); ++i) {
    out << i << ' ' << (chain.transient[i] ? 'T' : 'A') << ' ' << chain.states[i].str() << "\n";
  }
  out << "initial";
  for (std::size_t i : chain.initial) out << ' ' << i;
  out << "\n";
  out << "transitions " << transitions << "\n";
  for (std::size_t i = 0; i < chain.size(); ++i) {
    for (const auto& [j, w] : chain.rows[i]) out << i << ' ' << j << ' ' << to_string(w) << "\n";
    if (sgn(chain.to_sink[i]) > 0) out << i << " sink " << to_string(chain.to_sink[i]) << "\n";
  }
  out << "rewards\n";
  for (std::size_t i = 0; i < chain.size(); ++i) {
    if (!chain.transient[i]) out << i << ' ' << chain.reward[i].str() << "\n";
  }
  out << "truncated " << (chain.truncated ? 1 : 0) << "\n";
  out << "end\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// wp-difference

namespace {

struct LoopValues {
  MarkovChain chain;
  SolveResult result;
  bool exact() const { return !chain.truncated && result.method == Method::LINEAR_EXACT; }
};

LoopValues solve_loop(const Program& loop, const Expectation& post, const std::vector<State>& init,
                      StepEngine& engine) {
  LoopValues lv;
  lv.chain = explore(loop, init, engine);
  attach_rewards(lv.chain, closed_form(post));
  lv.result = solve(lv.chain);
  return lv;
}

// while(g) { body; if (g & !other) { _trace := 1 } } with the flag set up
// front when the initial state already qualifies.
LoopValues solve_trace(const Guard& g, const Guard& other, const Program& body, const Expectation& f,
                       const std::vector<State>& init, StepEngine& engine) {
  Guard mark = guard::conj(g, guard::negate(other));
  Program instrumented = prog::loop(
      g, prog::seq({body, prog::ite(mark, prog::assign(kTraceFlag, arith::lit(1)), prog::skip())}));
  std::vector<State> starts;
  for (const State& s : init) starts.push_back(s.with(kTraceFlag, Rational(eval_guard(mark, s) ? 1 : 0)));
  Expectation post = ex::mul_iverson(guard::cmp(arith::var(kTraceFlag), CmpOp::Eq, arith::lit(1)), f);
  return solve_loop(instrumented, post, starts, engine);
}

}  // namespace

DiffResult diff_decomposition(const Guard& g, const Guard& g2, const Program& body, const Expectation& f,
                              const std::vector<State>& init, const Budget& budget) {
  StepEngine engine(budget);
  Guard both = guard::conj(g, g2);
  LoopValues i = solve_loop(prog::loop(g, body), f, init, engine);
  LoopValues ii = solve_loop(prog::loop(g2, body), f, init, engine);
  LoopValues iii = solve_loop(prog::loop(both, body), ex::mul_iverson(guard::conj(guard::negate(g), g2), f), init,
                              engine);
  LoopValues iv = solve_loop(prog::loop(both, body), ex::mul_iverson(guard::conj(g, guard::negate(g2)), f), init,
                             engine);
  LoopValues a = solve_trace(g, g2, body, f, init, engine);
  LoopValues b = solve_trace(g2, g, body, f, init, engine);

  DiffResult out;
  for (std::size_t k = 0; k < init.size(); ++k) {
    DiffRow row;
    row.state = init[k];
    row.wp_g = i.result.values[i.chain.initial[k]];
    row.wp_g2 = ii.result.values[ii.chain.initial[k]];
    row.both_g2_out = iii.result.values[iii.chain.initial[k]];
    row.both_g_out = iv.result.values[iv.chain.initial[k]];
    row.trace_a = a.result.values[a.chain.initial[k]];
    row.trace_b = b.result.values[b.chain.initial[k]];
    bool exact = i.exact() && ii.exact() && iii.exact() && iv.exact() && a.exact() && b.exact();
    row.truncated = !exact;
    row.identity_holds = exact && row.wp_g + row.both_g_out + row.trace_b == row.wp_g2 + row.both_g2_out + row.trace_a;
    out.all_exact = out.all_exact && exact;
    out.identity_holds = out.identity_holds && row.identity_holds;
    out.rows.push_back(std::move(row));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Whole-program solving and sweeps

ProgramSolve solve_program(const Program& program, const StrengthenSpec* spec, const Expectation& f,
                           const std::vector<State>& init, const Budget& budget, const SolveOptions& options) {
  StepEngine engine(budget);
  ProgramSolve out;
  bool ends_in_loop = program->kind == StmtKind::While ||
                      (program->kind == StmtKind::Seq && program->children.back()->kind == StmtKind::While);
  if (!ends_in_loop) {
    if (spec) throw Error("strengthening needs a program ending in a while loop");
    for (const State& s : init) {
      SubDistribution d = engine.step(program, s);
      ExtRat v(0L);
      for (const auto& [t, w] : d.outcomes) v += ExtRat(w) * eval(f, t);
      out.truncated = out.truncated || sgn(d.truncated_mass) > 0;
      out.values.emplace_back(s, v);
    }
    return out;
  }

  auto [prefix, loop] = split_loop(program);
  Expectation post = f;
  if (spec) {
    post = restricted_post(loop->cond, f);
    loop = apply_strengthening(loop, *spec);
  }
  std::vector<SubDistribution> starts;
  std::vector<State> entry;
  for (const State& s : init) {
    starts.push_back(engine.step(prefix, s));
    for (const auto& [t, w] : starts.back().outcomes) entry.push_back(t);
    out.truncated = out.truncated || sgn(starts.back().truncated_mass) > 0;
  }
  MarkovChain chain = explore(loop, entry, engine);
  attach_rewards(chain, closed_form(post));
  SolveResult r = solve(chain, options);
  out.method = r.method;
  out.truncated = out.truncated || chain.truncated;
  out.states = chain.size();
  for (std::size_t k = 0; k < init.size(); ++k) {
    ExtRat v(0L);
    for (const auto& [t, w] : starts[k].outcomes) v += ExtRat(w) * r.at(chain, t);
    out.values.emplace_back(init[k], v);
  }
  return out;
}

SweepResult sweep(const Program& program, const SweepFamily& family, const Expectation& f,
                  const std::vector<State>& init, const Budget& budget, const SolveOptions& options, unsigned jobs) {
  SweepResult out;
  out.nested = family.nested;
  out.rows.resize(family.values.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < family.values.size(); k = next++) {
      SweepRow& row = out.rows[k];
      row.param = family.values[k];
      auto t0 = std::chrono::steady_clock::now();
      try {
        StrengthenSpec spec = family.at(row.param);
        ProgramSolve ps = solve_program(program, &spec, f, init, budget, options);
        row.values = std::move(ps.values);
        row.method = ps.method;
        row.truncated = ps.truncated;
        row.states = ps.states;
      } catch (const std::exception& e) {
        row.error = e.what();
      }
      row.millis = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    }
  };
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(family.values.size())));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  const SweepRow* prev = nullptr;
  for (const SweepRow& row : out.rows) {
    if (!row.error.empty()) continue;
    if (prev) {
      for (std::size_t s = 0; s < row.values.size(); ++s) {
        if (row.values[s].second < prev->values[s].second) {
          out.nondecreasing = false;
          if (!out.violation) out.violation = std::make_pair(row.param, row.values[s].first);
        }
      }
    }
    prev = &row;
  }
  return out;
}

}  // namespace pgcl
