#pragma once

#include "pgcl/ast.hpp"

namespace pgcl::detail {

// Binding strength of the outermost operator of a printed expression:
// 1 additive, 2 multiplicative, 3 unary minus, 4 power, 5 atom.
int precedence(const Arith& a);

}  // namespace pgcl::detail
