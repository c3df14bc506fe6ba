#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pgcl/ast.hpp"
#include "pgcl/expectation.hpp"
#include "pgcl/state.hpp"

namespace pgcl {

struct Budget {
  std::size_t max_states = 1000000;  // per explored chain
  unsigned max_depth = 8;            // nesting of inner loops
};

// Final-state sub-distribution of a program run. Missing mass is
// nontermination; the part of it caused by exploration limits is reported
// separately as truncated_mass.
struct SubDistribution {
  std::vector<std::pair<State, Rational>> outcomes;  // sorted by state, weights > 0
  Rational total_mass = 0;
  Rational truncated_mass = 0;
};

// Computes one-step distributions, solving inner loops exactly through their
// absorbing chains. Exit distributions of inner loops are cached per
// (loop, state), so reuse one engine across related queries.
class StepEngine {
 public:
  explicit StepEngine(Budget budget = {});
  ~StepEngine();
  StepEngine(const StepEngine&) = delete;
  StepEngine& operator=(const StepEngine&) = delete;

  SubDistribution step(const Program& c, const State& s, unsigned depth = 0);
  SubDistribution loop_exit(const Program& loop, const State& s, unsigned depth);

  const Budget& budget() const { return budget_; }

 private:
  // Holds the loop itself so cached entries never outlive their node.
  struct Key {
    Program loop;
    State state;
    bool operator==(const Key& o) const { return loop == o.loop && state == o.state; }
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      return k.state.hash() ^ (std::hash<const void*>{}(k.loop.get()) * 31);
    }
  };

  Budget budget_;
  std::unordered_map<Key, SubDistribution, KeyHash> exit_cache_;
};

SubDistribution step_distribution(const Program& c, const State& s, const Budget& budget = {});

// Loop-free, discrete programs only.
Expectation wp_symbolic(const Program& c, const Expectation& f);

using ValueFn = std::function<ExtRat(const State&)>;
using Table = std::map<State, ExtRat>;

ValueFn closed_form(Expectation f);
// Lookup outside the table raises DomainError.
ValueFn tabulated(Table t);

struct CharFn {
  Guard guard;
  Program body;
  Expectation post;
};

CharFn char_fn(const Program& loop, const Expectation& post);

struct Applied {
  ExtRat value;
  bool truncated = false;  // value is only a lower bound
};

// [!G]*f(s) + [G]*sum_t mu_s(t)*h(t)
Applied char_fn_apply(const CharFn& phi, const ValueFn& h, const State& s, StepEngine& engine);

// Iterates Phi^k(0) for k = 0..n over the domain; successors outside the
// domain count as 0, so every entry stays a lower bound.
std::vector<Table> kleene_iterate(const CharFn& phi, const std::vector<State>& domain, unsigned n,
                                  StepEngine& engine);

}  // namespace pgcl
