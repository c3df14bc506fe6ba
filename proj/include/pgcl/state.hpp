#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pgcl/rational.hpp"

namespace pgcl {

// A program state: variable name -> exact rational, kept sorted by name so
// that equality, ordering and hashing never depend on insertion order.
class State {
 public:
  using Entry = std::pair<std::string, Rational>;

  State() = default;
  State(std::initializer_list<Entry> entries);

  const Rational& get(std::string_view name) const;
  const Rational* find(std::string_view name) const;
  bool contains(std::string_view name) const { return find(name) != nullptr; }

  void set(std::string_view name, Rational value);
  State with(std::string_view name, Rational value) const;
  State without(std::string_view name) const;

  std::size_t size() const { return vars_.size(); }
  bool empty() const { return vars_.empty(); }
  auto begin() const { return vars_.begin(); }
  auto end() const { return vars_.end(); }

  std::size_t hash() const;

  // "n=1;x=-1/2"
  std::string str() const;

  friend bool operator==(const State& a, const State& b) { return a.vars_ == b.vars_; }
  friend bool operator!=(const State& a, const State& b) { return !(a == b); }
  friend bool operator<(const State& a, const State& b);

 private:
  std::vector<Entry> vars_;
};

struct StateHash {
  std::size_t operator()(const State& s) const { return s.hash(); }
};

// Parses "n=1; b=-2" or "n=1, b=-2" into a state.
State parse_state(std::string_view text);

}  // namespace pgcl
