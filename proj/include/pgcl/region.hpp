#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "pgcl/rational.hpp"
#include "pgcl/state.hpp"

namespace pgcl {

struct VarRange {
  std::string var;
  std::vector<Rational> values;
};

// "n=-2..12, b=0..20:1/2, a=0|1, c=3": inclusive ranges with an optional
// step, explicit alternatives, or a single value.
std::vector<VarRange> parse_ranges(std::string_view text);

// Cartesian product in lexicographic order of the listed variables.
// Throws when it would exceed max_states.
std::vector<State> expand(const std::vector<VarRange>& ranges, std::size_t max_states = 10000000);

std::vector<State> parse_region(std::string_view text, std::size_t max_states = 10000000);

}  // namespace pgcl
