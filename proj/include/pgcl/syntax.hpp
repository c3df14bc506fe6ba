#pragma once

#include <string>
#include <string_view>

#include "pgcl/ast.hpp"

namespace pgcl {

// Concrete syntax:
//   prog  := stmt (';' stmt)*
//   stmt  := 'skip' | 'diverge' | var ':=' aexpr | var ':~' dist
//          | '{' prog '}' '[' aexpr ']' '{' prog '}'
//          | '{' prog '}' ('⊕' | '(+)') '{' prog '}' (...)*
//          | 'if' '(' guard ')' '{' prog '}' ['else' '{' prog '}']
//          | 'while' '(' guard ')' '{' prog '}'
//   dist  := 'dist' '{' q ':' aexpr (',' q ':' aexpr)* '}' | 'uniform' '(' q ',' q ')'
// Comparisons may be chained ("0 < n < M" reads as "0 < n & n < M").
// Comments run from '//' or '#' to the end of the line.
Program parse_program(std::string_view text);
Arith parse_arith(std::string_view text);
Guard parse_guard(std::string_view text);

std::string pretty_print(const Program& p);
std::string pretty_print(const Arith& a);
std::string pretty_print(const Guard& g);

}  // namespace pgcl
