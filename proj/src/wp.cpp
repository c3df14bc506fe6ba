#include "pgcl/wp.hpp"

#include <map>

#include "pgcl/chain.hpp"
#include "pgcl/errors.hpp"
#include "pgcl/eval.hpp"
#include "pgcl/syntax.hpp"

namespace pgcl {

namespace {

struct Acc {
  std::map<State, Rational> out;
  Rational truncated = 0;
};

Rational probability(const Program& c, const State& s) {
  Rational p = eval_arith(c->expr, s);
  if (sgn(p) < 0 || p > 1) {
    throw EvalError("choice probability " + pretty_print(c->expr) + " = " + to_string(p) + " outside [0,1] at " +
                    s.str());
  }
  return p;
}

SubDistribution finish(Acc& acc) {
  SubDistribution d;
  d.outcomes.reserve(acc.out.size());
  for (auto& [s, w] : acc.out) {
    if (sgn(w) == 0) continue;
    d.total_mass += w;
    d.outcomes.emplace_back(s, std::move(w));
  }
  d.truncated_mass = std::move(acc.truncated);
  return d;
}

}  // namespace

StepEngine::StepEngine(Budget budget) : budget_(budget) {}
StepEngine::~StepEngine() = default;

namespace {

void run(StepEngine& engine, const Program& c, const State& s, const Rational& w, unsigned depth, Acc& acc) {
  switch (c->kind) {
    case StmtKind::Skip:
      acc.out[s] += w;
      return;
    case StmtKind::Assign:
      acc.out[s.with(c->var, eval_arith(c->expr, s))] += w;
      return;
    case StmtKind::RandomAssign:
      if (c->dist.continuous) throw Unsupported("continuous distributions are only supported by the simulator");
      for (const auto& [weight, value] : c->dist.outcomes) acc.out[s.with(c->var, eval_arith(value, s))] += w * weight;
      return;
    case StmtKind::Seq: {
      std::map<State, Rational> cur{{s, w}};
      for (std::size_t i = 0; i + 1 < c->children.size(); ++i) {
        Acc next;
        for (const auto& [t, wt] : cur) run(engine, c->children[i], t, wt, depth, next);
        acc.truncated += next.truncated;
        cur = std::move(next.out);
      }
      for (const auto& [t, wt] : cur) run(engine, c->children.back(), t, wt, depth, acc);
      return;
    }
    case StmtKind::ProbChoice: {
      Rational p = probability(c, s);
      if (sgn(p) > 0) run(engine, c->children[0], s, w * p, depth, acc);
      if (p < 1) run(engine, c->children[1], s, w * (1 - p), depth, acc);
      return;
    }
    case StmtKind::UniformChoice: {
      Rational share = w / Rational(static_cast<long>(c->children.size()));
      for (const Program& b : c->children) run(engine, b, s, share, depth, acc);
      return;
    }
    case StmtKind::If:
      run(engine, eval_guard(c->cond, s) ? c->children[0] : c->children[1], s, w, depth, acc);
      return;
    case StmtKind::While: {
      SubDistribution d = engine.loop_exit(c, s, depth + 1);
      for (const auto& [t, wt] : d.outcomes) acc.out[t] += w * wt;
      acc.truncated += w * d.truncated_mass;
      return;
    }
  }
}

}  // namespace

SubDistribution StepEngine::step(const Program& c, const State& s, unsigned depth) {
  Acc acc;
  run(*this, c, s, Rational(1), depth, acc);
  return finish(acc);
}

SubDistribution StepEngine::loop_exit(const Program& loop, const State& s, unsigned depth) {
  if (!eval_guard(loop->cond, s)) {
    SubDistribution d;
    d.outcomes.emplace_back(s, Rational(1));
    d.total_mass = 1;
    return d;
  }
  if (depth > budget_.max_depth) {
    SubDistribution d;
    d.truncated_mass = 1;
    return d;
  }
  Key key{loop, s};
  auto it = exit_cache_.find(key);
  if (it != exit_cache_.end()) return it->second;
  MarkovChain chain = explore(loop, {s}, *this, depth);
  SubDistribution d = absorption_distribution(chain, chain.initial.front());
  exit_cache_.emplace(std::move(key), d);
  return d;
}

SubDistribution step_distribution(const Program& c, const State& s, const Budget& budget) {
  StepEngine engine(budget);
  return engine.step(c, s);
}

Expectation wp_symbolic(const Program& c, const Expectation& f) {
  switch (c->kind) {
    case StmtKind::Skip:
      return f;
    case StmtKind::Assign:
      return subst(f, c->var, c->expr);
    case StmtKind::RandomAssign: {
      if (c->dist.continuous) throw Unsupported("wp of a continuous distribution is not supported");
      Expectation sum = ex::zero();
      for (const auto& [weight, value] : c->dist.outcomes) sum = ex::add(sum, ex::scale(weight, subst(f, c->var, value)));
      return sum;
    }
    case StmtKind::Seq: {
      Expectation g = f;
      for (auto it = c->children.rbegin(); it != c->children.rend(); ++it) g = wp_symbolic(*it, g);
      return g;
    }
    case StmtKind::ProbChoice: {
      Expectation left = wp_symbolic(c->children[0], f);
      Expectation right = wp_symbolic(c->children[1], f);
      if (is_constant(c->expr)) {
        Rational p = eval_constant(c->expr);
        return ex::add(ex::scale(p, left), ex::scale(1 - p, right));
      }
      return ex::add(ex::mul(ex::term(c->expr), left), ex::mul(ex::term(arith::sub(arith::lit(1), c->expr)), right));
    }
    case StmtKind::UniformChoice: {
      Rational share(1, static_cast<long>(c->children.size()));
      share.canonicalize();
      Expectation sum = ex::zero();
      for (const Program& b : c->children) sum = ex::add(sum, ex::scale(share, wp_symbolic(b, f)));
      return sum;
    }
    case StmtKind::If:
      return ex::add(ex::mul_iverson(c->cond, wp_symbolic(c->children[0], f)),
                     ex::mul_iverson(guard::negate(c->cond), wp_symbolic(c->children[1], f)));
    case StmtKind::While:
      throw Unsupported("wp_symbolic does not handle loops");
  }
  throw Error("corrupt program");
}

ValueFn closed_form(Expectation f) {
  return [f = std::move(f)](const State& s) { return eval(f, s); };
}

ValueFn tabulated(Table t) {
  auto table = std::make_shared<const Table>(std::move(t));
  return [table](const State& s) {
    auto it = table->find(s);
    if (it == table->end()) throw DomainError("state " + s.str() + " is outside the tabulated domain");
    return it->second;
  };
}

CharFn char_fn(const Program& loop, const Expectation& post) {
  if (loop->kind != StmtKind::While) throw Error("characteristic function needs a while loop");
  return CharFn{loop->cond, loop->children[0], post};
}

Applied char_fn_apply(const CharFn& phi, const ValueFn& h, const State& s, StepEngine& engine) {
  if (!eval_guard(phi.guard, s)) return {eval(phi.post, s), false};
  SubDistribution d = engine.step(phi.body, s);
  ExtRat sum(0L);
  for (const auto& [t, w] : d.outcomes) sum += ExtRat(w) * h(t);
  return {sum, sgn(d.truncated_mass) > 0};
}

std::vector<Table> kleene_iterate(const CharFn& phi, const std::vector<State>& domain, unsigned n,
                                  StepEngine& engine) {
  std::map<State, std::size_t> index;
  for (const State& s : domain) index.emplace(s, index.size());
  std::vector<State> states(index.size());
  for (const auto& [s, i] : index) states[i] = s;

  struct Row {
    bool guard = false;
    ExtRat post;
    std::vector<std::pair<std::size_t, Rational>> succ;
  };
  std::vector<Row> rows(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    const State& s = states[i];
    rows[i].guard = eval_guard(phi.guard, s);
    if (!rows[i].guard) {
      rows[i].post = eval(phi.post, s);
      continue;
    }
    for (const auto& [t, w] : engine.step(phi.body, s).outcomes) {
      auto it = index.find(t);
      if (it != index.end()) rows[i].succ.emplace_back(it->second, w);
    }
  }

  std::vector<Table> out;
  std::vector<ExtRat> cur(states.size(), ExtRat(0L));
  auto snapshot = [&] {
    Table t;
    for (std::size_t i = 0; i < states.size(); ++i) t.emplace_hint(t.end(), states[i], cur[i]);
    out.push_back(std::move(t));
  };
  snapshot();
  for (unsigned k = 0; k < n; ++k) {
    std::vector<ExtRat> next(states.size());
    for (std::size_t i = 0; i < states.size(); ++i) {
      if (!rows[i].guard) {
        next[i] = rows[i].post;
        continue;
      }
      ExtRat sum(0L);
      for (const auto& [j, w] : rows[i].succ) sum += ExtRat(w) * cur[j];
      next[i] = sum;
    }
    cur = std::move(next);
    snapshot();
  }
  return out;
}

}  // namespace pgcl
