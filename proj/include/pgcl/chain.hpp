#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pgcl/ast.hpp"
#include "pgcl/expectation.hpp"
#include "pgcl/state.hpp"
#include "pgcl/strengthen.hpp"
#include "pgcl/wp.hpp"

namespace pgcl {

// Explicit absorbing chain of a loop. Transient states satisfy the guard,
// absorbing states do not. Mass lost to exploration limits goes to a
// synthetic TRUNCATED sink (reward 0); mass lost to genuine divergence of the
// body is simply missing from the row.
struct MarkovChain {
  Guard guard;
  Program body;
  std::vector<State> states;  // BFS discovery order
  std::unordered_map<State, std::size_t, StateHash> index;
  std::vector<char> transient;
  std::vector<char> expanded;  // false for frontier states cut off by the budget
  std::vector<std::vector<std::pair<std::size_t, Rational>>> rows;
  std::vector<Rational> to_sink;
  std::vector<std::size_t> initial;
  std::vector<ExtRat> reward;  // per state; meaningful at absorbing states
  bool truncated = false;

  std::size_t size() const { return states.size(); }
  std::optional<std::size_t> find(const State& s) const;
  std::size_t transient_count() const;
};

MarkovChain explore(const Program& loop, const std::vector<State>& init, StepEngine& engine, unsigned depth = 0);
MarkovChain explore(const Program& loop, const std::vector<State>& init, const Budget& budget = {});

// Sets the reward of every absorbing state to f.
void attach_rewards(MarkovChain& chain, const ValueFn& f);

enum class Method { LINEAR_EXACT, VALUE_ITER, CERTIFIED_LOWER };
const char* method_name(Method m);

struct SolveResult {
  std::vector<ExtRat> values;  // per chain state
  Method method = Method::LINEAR_EXACT;
  unsigned long iterations = 0;
  bool truncated = false;
  bool unbounded = false;  // value iteration reached an infinite value
  std::optional<Rational> residual;

  ExtRat at(const MarkovChain& chain, const State& s) const;
};

// Exact sparse elimination; throws InfiniteReward on infinite rewards.
SolveResult solve_exact(const MarkovChain& chain);

// Phi^k(0) for k = max_iters at most, stopping early once successive
// iterates differ by less than epsilon everywhere. With round_bits > 0 every
// iterate is rounded down to a multiple of 2^-round_bits, which keeps numbers
// small and the iterates monotone lower bounds.
SolveResult value_iterate(const MarkovChain& chain, unsigned long max_iters, const Rational& epsilon,
                          int round_bits = 0);

// A floating-point solve proposes a candidate, which is shifted down and
// accepted only if it passes an exact subinvariance check. Every value is a
// lower bound on the exact solution.
SolveResult solve_certified(const MarkovChain& chain);

enum class SolveMethod { Auto, Exact, Certified, ValueIter };

struct SolveOptions {
  SolveMethod method = SolveMethod::Auto;
  std::size_t exact_limit = 600;  // Auto: exact up to this many unknowns
  unsigned long max_iters = 100000;
};

SolveResult solve(const MarkovChain& chain, const SolveOptions& options = {});

// Exit distribution of the chain started in state `from`.
SubDistribution absorption_distribution(const MarkovChain& chain, std::size_t from);

// Expected number of steps until absorption; infinite where absorption is
// not almost sure.
std::vector<ExtRat> expected_steps(const MarkovChain& chain);

struct LoopingTimeProfile {
  // tail[i][k] = P(T > k) from state i; divergence and truncation count as
  // never leaving the loop.
  std::vector<std::vector<Rational>> tail;
};

LoopingTimeProfile looping_time_profile(const MarkovChain& chain, unsigned n);

// Line-oriented text export of the chain (see docs/chain_format.md).
std::string dump(const MarkovChain& chain);

// Terms of the wp-difference identity for one start state.
struct DiffRow {
  State state;
  ExtRat wp_g;         // while(G) with f
  ExtRat wp_g2;        // while(G2) with f
  ExtRat both_g2_out;  // while(G & G2) with [!G & G2] * f
  ExtRat both_g_out;   // while(G & G2) with [G & !G2] * f
  ExtRat trace_a;      // runs of while(G) passing a G & !G2 state before exiting
  ExtRat trace_b;      // runs of while(G2) passing a G2 & !G state before exiting
  bool truncated = false;
  bool identity_holds = false;  // exact check; meaningless when truncated
};

struct DiffResult {
  std::vector<DiffRow> rows;
  bool all_exact = true;
  bool identity_holds = true;
};

// Flag variable used by the instrumented loops.
inline constexpr const char* kTraceFlag = "_trace";

DiffResult diff_decomposition(const Guard& g, const Guard& g2, const Program& body, const Expectation& f,
                              const std::vector<State>& init, const Budget& budget = {});

struct SweepRow {
  Rational param;
  std::vector<std::pair<State, ExtRat>> values;  // per initial state
  Method method = Method::LINEAR_EXACT;
  bool truncated = false;
  std::size_t states = 0;
  double millis = 0;
  std::string error;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  bool nested = false;         // family is nested, so values must not decrease
  bool nondecreasing = true;
  std::optional<std::pair<Rational, State>> violation;
};

// `program` is "prefix; while(G){...}". The prefix runs from every initial
// state, then the strengthened loop is solved against the restricted post.
SweepResult sweep(const Program& program, const SweepFamily& family, const Expectation& f,
                  const std::vector<State>& init, const Budget& budget, const SolveOptions& options,
                  unsigned jobs = 1);

// Values of the program from each initial state, with the loop strengthened
// by `spec` and solved against [!G]*f.
struct ProgramSolve {
  std::vector<std::pair<State, ExtRat>> values;
  Method method = Method::LINEAR_EXACT;
  bool truncated = false;
  std::size_t states = 0;
};

ProgramSolve solve_program(const Program& program, const StrengthenSpec* spec, const Expectation& f,
                           const std::vector<State>& init, const Budget& budget, const SolveOptions& options);

}  // namespace pgcl
