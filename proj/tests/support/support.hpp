#pragma once

#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "pgcl/ast.hpp"
#include "pgcl/errors.hpp"
#include "pgcl/expectation.hpp"
#include "pgcl/rational.hpp"
#include "pgcl/state.hpp"
#include "pgcl/syntax.hpp"

namespace testing {

using namespace pgcl;

inline std::string corpus_path(const std::string& name) { return std::string(CORPUS_DIR) + "/" + name; }

inline std::string read_corpus(const std::string& name) {
  std::ifstream in(corpus_path(name));
  if (!in) throw Error("missing corpus file " + name);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Program corpus_program(const std::string& name) { return parse_program(read_corpus(name + ".pgcl")); }

inline Rational pow_q(const Rational& base, unsigned k) {
  Rational r = 1;
  for (unsigned i = 0; i < k; ++i) r *= base;
  return r;
}

// Probability that a walk stepping down with probability q (and up otherwise)
// reaches 0 before m, from start n with 0 <= n <= m.
inline Rational ruin(const Rational& q, long n, long m) {
  Rational p = 1 - q;
  if (q == p) return Rational(m - n) / m;
  Rational r = q / p;
  Rational top = pow_q(r, static_cast<unsigned>(n)) - pow_q(r, static_cast<unsigned>(m));
  Rational bottom = 1 - pow_q(r, static_cast<unsigned>(m));
  return top / bottom;
}

inline std::vector<State> ints(const std::string& var, long lo, long hi) {
  std::vector<State> out;
  for (long v = lo; v <= hi; ++v) out.push_back(State{{var, Rational(v)}});
  return out;
}

// Small random loop-free programs over x and y with integer data.
class ProgramGen {
 public:
  explicit ProgramGen(unsigned seed) : rng_(seed) {}

  int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

  Arith expr() {
    switch (pick(0, 3)) {
      case 0: return arith::add(var(), arith::lit(pick(-2, 2)));
      case 1: return arith::lit(pick(-3, 3));
      case 2: return arith::sub(var(), var());
      default: return arith::add(var(), var());
    }
  }

  Guard cond() { return guard::cmp(var(), pick(0, 1) ? CmpOp::Lt : CmpOp::Eq, arith::lit(pick(-1, 2))); }

  Program program(int depth = 3) {
    int k = depth <= 0 ? pick(0, 1) : pick(0, 5);
    switch (k) {
      case 0: return prog::skip();
      case 1: return prog::assign(pick(0, 1) ? "x" : "y", expr());
      case 2: return prog::seq({program(depth - 1), program(depth - 1)});
      case 3: return prog::choice(program(depth - 1), arith::lit(Rational(pick(0, 4)) / 4), program(depth - 1));
      case 4: return prog::ite(cond(), program(depth - 1), program(depth - 1));
      default: return prog::uniform({program(depth - 1), program(depth - 1), program(depth - 1)});
    }
  }

  Expectation post() {
    switch (pick(0, 3)) {
      case 0: return ex::iverson(cond());
      case 1: return ex::term(arith::abs(var()));
      case 2: return ex::add(ex::constant(Rational(Rational(pick(0, 5)) / 2)), ex::iverson(cond()));
      default: {
        Arith v = var();
        return ex::mul(ex::iverson(cond()), ex::term(arith::mul(v, v)));
      }
    }
  }

  State state() { return State{{"x", Rational(pick(-3, 3))}, {"y", Rational(pick(-3, 3))}}; }

 private:
  Arith var() { return arith::var(pick(0, 1) ? "x" : "y"); }

  std::mt19937 rng_;
};

}  // namespace testing
