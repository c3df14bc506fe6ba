#pragma once

#include <array>
#include <cstdint>

#include "pgcl/ast.hpp"
#include "pgcl/expectation.hpp"
#include "pgcl/state.hpp"

namespace pgcl {

// Philox4x32-10 counter-based generator. Every trial owns the stream keyed
// by the seed with counter (trial, draw), so trials never share state and
// any subset of them can be replayed in isolation.
class Philox {
 public:
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Block generate(Block counter, Key key);
};

class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t trial);

  std::uint64_t next_u64();
  // k / 2^53 for a uniform k in [0, 2^53).
  Rational unit();
  // floor(unit() * n)
  std::uint64_t below(std::uint64_t n);

 private:
  Philox::Key key_;
  std::uint64_t trial_;
  std::uint64_t draw_ = 0;
  Philox::Block buffer_{};
  int used_ = 4;
};

enum class SimStatus { TERMINATED, CUTOFF };

struct SimOutcome {
  SimStatus status = SimStatus::TERMINATED;
  State final_state;             // meaningful when TERMINATED
  unsigned long long steps = 0;  // loop iterations, summed over all loops
  unsigned long long trace_length = 0;  // executed statements
};

// Runs one trial. uniform(lo, hi) draws a double lo + (hi - lo) * u and
// rounds it down to a multiple of 2^-53.
SimOutcome simulate(const Program& c, const State& s, unsigned long long max_steps, std::uint64_t seed,
                    std::uint64_t trial = 0);

struct Estimate {
  double mean = 0;
  Rational exact_mean = 0;  // exact average of the sampled values
  unsigned long long trials = 0;
  unsigned long long cutoffs = 0;
  double cutoff_fraction = 0;
  double half_width = 0;  // 99% normal-approximation confidence half-width
  std::uint64_t seed = 0;
};

inline constexpr double kZ99 = 2.5758293035489;

// CUTOFF runs contribute 0. f may be negative at final states; it is
// evaluated with eval_signed, so an infinite value throws InfiniteReward.
// Results do not depend on `jobs`.
Estimate estimate_wp(const Program& c, const Expectation& f, const State& s, unsigned long long trials,
                     unsigned long long max_steps, std::uint64_t seed, unsigned jobs = 1);

}  // namespace pgcl
