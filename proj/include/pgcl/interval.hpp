#pragma once

#include <map>
#include <optional>
#include <string>

#include "pgcl/ast.hpp"
#include "pgcl/expectation.hpp"
#include "pgcl/rational.hpp"

namespace pgcl {

// Closed rational interval; a missing end is unbounded. Strictness of the
// ends is tracked only for bounds coming from guards, where it decides
// whether two guarded regions overlap.
struct Interval {
  std::optional<Rational> lo;
  std::optional<Rational> hi;
  bool lo_strict = false;
  bool hi_strict = false;

  static Interval all() { return {}; }
  static Interval point(const Rational& q) { return {q, q}; }

  bool bounded() const { return lo && hi; }
  bool empty() const;
  std::string str() const;
};

Interval meet(const Interval& a, const Interval& b);
bool disjoint(const Interval& a, const Interval& b);

// Variable ranges; absent variables are unbounded.
class Box {
 public:
  Interval get(const std::string& var) const;
  void restrict(const std::string& var, const Interval& range);
  bool empty() const;
  bool disjoint(const Box& other) const;
  void mark_empty() { infeasible_ = true; }
  const std::map<std::string, Interval>& ranges() const { return ranges_; }

 private:
  std::map<std::string, Interval> ranges_;
  bool infeasible_ = false;
};

Interval eval_interval(const Arith& e, const Box& box);

// Narrows the box by the conjuncts of g that are linear in one variable,
// e.g. n - 1 < 0 or 2*x >= 3. Other conjuncts are ignored, so the result
// over-approximates the region where g holds.
Box refine(const Box& box, const Guard& g);

// Enclosure of a nonnegative expectation; hi = nullopt means no finite bound.
struct ExpRange {
  Rational lo = 0;
  std::optional<Rational> hi;
};

ExpRange eval_range(const Expectation& f, const Box& box);

}  // namespace pgcl
