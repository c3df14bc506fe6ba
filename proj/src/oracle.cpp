#include "pgcl/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>
#include <vector>

#include "pgcl/errors.hpp"
#include "pgcl/eval.hpp"

namespace pgcl {

Philox::Block Philox::generate(Block c, Key k) {
  constexpr std::uint32_t kM0 = 0xD2511F53u;
  constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  constexpr std::uint32_t kW0 = 0x9E3779B9u;
  constexpr std::uint32_t kW1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      k[0] += kW0;
      k[1] += kW1;
    }
    std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * c[0];
    std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * c[2];
    c = {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0], static_cast<std::uint32_t>(p1),
         static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1], static_cast<std::uint32_t>(p0)};
  }
  return c;
}

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t trial)
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)}, trial_(trial) {}

std::uint64_t RandomStream::next_u64() {
  if (used_ >= 4) {
    buffer_ = Philox::generate({static_cast<std::uint32_t>(trial_), static_cast<std::uint32_t>(trial_ >> 32),
                                static_cast<std::uint32_t>(draw_), static_cast<std::uint32_t>(draw_ >> 32)},
                               key_);
    ++draw_;
    used_ = 0;
  }
  std::uint64_t v = (static_cast<std::uint64_t>(buffer_[used_]) << 32) | buffer_[used_ + 1];
  used_ += 2;
  return v;
}

Rational RandomStream::unit() {
  mpz_class k;
  std::uint64_t bits = next_u64() >> 11;
  mpz_import(k.get_mpz_t(), 1, 1, sizeof bits, 0, 0, &bits);
  Rational r(k, mpz_class(1) << 53);
  r.canonicalize();
  return r;
}

std::uint64_t RandomStream::below(std::uint64_t n) {
  unsigned __int128 x = static_cast<unsigned __int128>(next_u64() >> 11) * n;
  return static_cast<std::uint64_t>(x >> 53);
}

namespace {

struct Cutoff {};

struct Runner {
  State state;
  RandomStream rng;
  unsigned long long max_steps;
  unsigned long long steps = 0;
  unsigned long long statements = 0;

  void run(const Program& c) {
    ++statements;
    switch (c->kind) {
      case StmtKind::Skip:
        return;
      case StmtKind::Assign:
        state.set(c->var, eval_arith(c->expr, state));
        return;
      case StmtKind::RandomAssign:
        state.set(c->var, sample(c->dist));
        return;
      case StmtKind::Seq:
        for (const Program& p : c->children) run(p);
        return;
      case StmtKind::ProbChoice: {
        Rational p = eval_arith(c->expr, state);
        if (sgn(p) < 0 || p > 1) throw EvalError("choice probability " + to_string(p) + " outside [0,1]");
        run(rng.unit() < p ? c->children[0] : c->children[1]);
        return;
      }
      case StmtKind::UniformChoice:
        run(c->children[rng.below(c->children.size())]);
        return;
      case StmtKind::If:
        run(eval_guard(c->cond, state) ? c->children[0] : c->children[1]);
        return;
      case StmtKind::While:
        while (eval_guard(c->cond, state)) {
          if (steps >= max_steps) throw Cutoff{};
          ++steps;
          run(c->children[0]);
        }
        return;
    }
  }

  Rational sample(const Distribution& d) {
    if (d.continuous) {
      double lo = to_double(d.lo);
      double hi = to_double(d.hi);
      double x = lo + (hi - lo) * to_double(rng.unit());
      return floor_dyadic(x, 53);
    }
    Rational u = rng.unit();
    Rational acc = 0;
    for (const auto& [w, value] : d.outcomes) {
      acc += w;
      if (u < acc) return eval_arith(value, state);
    }
    return eval_arith(d.outcomes.back().second, state);
  }
};

struct Partial {
  Rational sum = 0;
  Rational sum_sq = 0;
  unsigned long long cutoffs = 0;
};

}  // namespace

SimOutcome simulate(const Program& c, const State& s, unsigned long long max_steps, std::uint64_t seed,
                    std::uint64_t trial) {
  Runner r{s, RandomStream(seed, trial), max_steps};
  SimOutcome out;
  try {
    r.run(c);
    out.status = SimStatus::TERMINATED;
    out.final_state = std::move(r.state);
  } catch (const Cutoff&) {
    out.status = SimStatus::CUTOFF;
  }
  out.steps = r.steps;
  out.trace_length = r.statements;
  return out;
}

Estimate estimate_wp(const Program& c, const Expectation& f, const State& s, unsigned long long trials,
                     unsigned long long max_steps, std::uint64_t seed, unsigned jobs) {
  if (trials == 0) throw Error("estimate needs at least one trial");
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::min<unsigned long long>(trials, 256))));
  std::vector<Partial> parts(jobs);
  std::vector<std::exception_ptr> errors(jobs);
  auto work = [&](unsigned j) {
    try {
      for (unsigned long long t = j; t < trials; t += jobs) {
        SimOutcome o = simulate(c, s, max_steps, seed, t);
        if (o.status == SimStatus::CUTOFF) {
          ++parts[j].cutoffs;
          continue;
        }
        Rational v = eval_signed(f, o.final_state);
        parts[j].sum += v;
        parts[j].sum_sq += v * v;
      }
    } catch (...) {
      errors[j] = std::current_exception();
    }
  };
  if (jobs == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(work, j);
    for (std::thread& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  Partial total;
  for (const Partial& p : parts) {
    total.sum += p.sum;
    total.sum_sq += p.sum_sq;
    total.cutoffs += p.cutoffs;
  }
  Estimate est;
  est.trials = trials;
  est.seed = seed;
  est.cutoffs = total.cutoffs;
  est.cutoff_fraction = static_cast<double>(total.cutoffs) / static_cast<double>(trials);
  Rational n{mpz_class(static_cast<unsigned long>(trials))};
  est.exact_mean = total.sum / n;
  est.mean = to_double(est.exact_mean);
  if (trials > 1) {
    Rational var = (total.sum_sq - total.sum * est.exact_mean) / (n - 1);
    est.half_width = kZ99 * std::sqrt(std::max(0.0, to_double(var)) / static_cast<double>(trials));
  }
  return est;
}

}  // namespace pgcl
