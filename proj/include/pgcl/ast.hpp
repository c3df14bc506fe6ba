#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pgcl/rational.hpp"

namespace pgcl {

// ---------------------------------------------------------------------------
// Arithmetic expressions

enum class ArithOp { Lit, Var, Neg, Add, Sub, Mul, Div, Pow, Min, Max, Abs, Floor };

struct ArithNode;
using Arith = std::shared_ptr<const ArithNode>;

struct ArithNode {
  ArithOp op;
  Rational value;    // Lit
  std::string name;  // Var
  Arith lhs;         // unary operand or left operand
  Arith rhs;
};

namespace arith {
Arith lit(const Rational& q);
Arith var(std::string name);
Arith neg(Arith a);
Arith add(Arith a, Arith b);
Arith sub(Arith a, Arith b);
Arith mul(Arith a, Arith b);
Arith div(Arith a, Arith b);
Arith pow(Arith base, Arith exponent);
Arith min(Arith a, Arith b);
Arith max(Arith a, Arith b);
Arith abs(Arith a);
Arith floor(Arith a);
}  // namespace arith

bool equal(const Arith& a, const Arith& b);
// True when the expression mentions no variable.
bool is_constant(const Arith& a);
void collect_vars(const Arith& a, std::vector<std::string>& out);
Arith substitute(const Arith& a, const std::string& x, const Arith& e);

// ---------------------------------------------------------------------------
// Guards

enum class GuardOp { True, False, Cmp, Not, And, Or };
enum class CmpOp { Lt, Le, Eq, Ne, Ge, Gt };

struct GuardNode;
using Guard = std::shared_ptr<const GuardNode>;

struct GuardNode {
  GuardOp op;
  CmpOp cmp = CmpOp::Eq;
  Arith lhs;  // Cmp
  Arith rhs;
  Guard a;  // Not, And, Or
  Guard b;
};

namespace guard {
Guard truth();
Guard falsity();
Guard cmp(Arith lhs, CmpOp op, Arith rhs);
Guard negate(Guard g);
Guard conj(Guard a, Guard b);
Guard disj(Guard a, Guard b);
}  // namespace guard

bool equal(const Guard& a, const Guard& b);
void collect_vars(const Guard& g, std::vector<std::string>& out);
Guard substitute(const Guard& g, const std::string& x, const Arith& e);
const char* cmp_symbol(CmpOp op);
CmpOp parse_cmp(const std::string& symbol);

// ---------------------------------------------------------------------------
// Programs

// Either a finite list of (weight, value) pairs or a continuous uniform(lo, hi).
struct Distribution {
  bool continuous = false;
  std::vector<std::pair<Rational, Arith>> outcomes;
  Rational lo;
  Rational hi;
};

enum class StmtKind { Skip, Assign, RandomAssign, Seq, ProbChoice, UniformChoice, If, While };

struct ProgramNode;
using Program = std::shared_ptr<const ProgramNode>;

struct ProgramNode {
  StmtKind kind;
  std::string var;               // Assign, RandomAssign
  Arith expr;                    // Assign; probability of ProbChoice
  Distribution dist;             // RandomAssign
  Guard cond;                    // If, While
  std::vector<Program> children;  // Seq, UniformChoice; ProbChoice/If: [then, else]; While: [body]
};

namespace prog {
Program skip();
Program assign(std::string x, Arith e);
Program random_assign(std::string x, Distribution d);
Program seq(std::vector<Program> parts);
Program choice(Program left, Arith p, Program right);
Program uniform(std::vector<Program> branches);
Program ite(Guard g, Program then_branch, Program else_branch);
Program loop(Guard g, Program body);
Program diverge();
}  // namespace prog

bool equal(const Program& a, const Program& b);
bool is_loop_free(const Program& p);
bool has_continuous(const Program& p);
void collect_vars(const Program& p, std::vector<std::string>& out);

// Splits "prefix; while(...) {...}" into its loop-free prefix (skip when
// absent) and trailing loop. Throws if the last statement is not a loop.
std::pair<Program, Program> split_loop(const Program& p);

}  // namespace pgcl
