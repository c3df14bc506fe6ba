#include "pgcl/ast.hpp"

#include <algorithm>

#include "pgcl/errors.hpp"

namespace pgcl {

namespace arith {

namespace {
Arith make(ArithOp op, Arith lhs = nullptr, Arith rhs = nullptr) {
  auto n = std::make_shared<ArithNode>();
  n->op = op;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}
}  // namespace

Arith lit(const Rational& q) {
  auto n = std::make_shared<ArithNode>();
  n->op = ArithOp::Lit;
  n->value = q;
  return n;
}

Arith var(std::string name) {
  auto n = std::make_shared<ArithNode>();
  n->op = ArithOp::Var;
  n->name = std::move(name);
  return n;
}

Arith neg(Arith a) { return make(ArithOp::Neg, std::move(a)); }
Arith add(Arith a, Arith b) { return make(ArithOp::Add, std::move(a), std::move(b)); }
Arith sub(Arith a, Arith b) { return make(ArithOp::Sub, std::move(a), std::move(b)); }
Arith mul(Arith a, Arith b) { return make(ArithOp::Mul, std::move(a), std::move(b)); }
Arith div(Arith a, Arith b) { return make(ArithOp::Div, std::move(a), std::move(b)); }
Arith pow(Arith base, Arith exponent) { return make(ArithOp::Pow, std::move(base), std::move(exponent)); }
Arith min(Arith a, Arith b) { return make(ArithOp::Min, std::move(a), std::move(b)); }
Arith max(Arith a, Arith b) { return make(ArithOp::Max, std::move(a), std::move(b)); }
Arith abs(Arith a) { return make(ArithOp::Abs, std::move(a)); }
Arith floor(Arith a) { return make(ArithOp::Floor, std::move(a)); }

}  // namespace arith

bool equal(const Arith& a, const Arith& b) {
  if (a == b) return true;
  if (!a || !b || a->op != b->op) return false;
  switch (a->op) {
    case ArithOp::Lit:
      return a->value == b->value;
    case ArithOp::Var:
      return a->name == b->name;
    default:
      return equal(a->lhs, b->lhs) && equal(a->rhs, b->rhs);
  }
}

bool is_constant(const Arith& a) {
  if (!a) return true;
  if (a->op == ArithOp::Var) return false;
  return is_constant(a->lhs) && is_constant(a->rhs);
}

void collect_vars(const Arith& a, std::vector<std::string>& out) {
  if (!a) return;
  if (a->op == ArithOp::Var) {
    if (std::find(out.begin(), out.end(), a->name) == out.end()) out.push_back(a->name);
    return;
  }
  collect_vars(a->lhs, out);
  collect_vars(a->rhs, out);
}

Arith substitute(const Arith& a, const std::string& x, const Arith& e) {
  if (!a) return a;
  switch (a->op) {
    case ArithOp::Lit:
      return a;
    case ArithOp::Var:
      return a->name == x ? e : a;
    default: {
      Arith l = substitute(a->lhs, x, e);
      Arith r = substitute(a->rhs, x, e);
      if (l == a->lhs && r == a->rhs) return a;
      auto n = std::make_shared<ArithNode>(*a);
      n->lhs = std::move(l);
      n->rhs = std::move(r);
      return n;
    }
  }
}

namespace guard {

namespace {
Guard make(GuardOp op, Guard a = nullptr, Guard b = nullptr) {
  auto n = std::make_shared<GuardNode>();
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}
}  // namespace

Guard truth() {
  static const Guard t = make(GuardOp::True);
  return t;
}

Guard falsity() {
  static const Guard f = make(GuardOp::False);
  return f;
}

Guard cmp(Arith lhs, CmpOp op, Arith rhs) {
  auto n = std::make_shared<GuardNode>();
  n->op = GuardOp::Cmp;
  n->cmp = op;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

Guard negate(Guard g) { return make(GuardOp::Not, std::move(g)); }
Guard conj(Guard a, Guard b) { return make(GuardOp::And, std::move(a), std::move(b)); }
Guard disj(Guard a, Guard b) { return make(GuardOp::Or, std::move(a), std::move(b)); }

}  // namespace guard

bool equal(const Guard& a, const Guard& b) {
  if (a == b) return true;
  if (!a || !b || a->op != b->op) return false;
  switch (a->op) {
    case GuardOp::True:
    case GuardOp::False:
      return true;
    case GuardOp::Cmp:
      return a->cmp == b->cmp && equal(a->lhs, b->lhs) && equal(a->rhs, b->rhs);
    default:
      return equal(a->a, b->a) && equal(a->b, b->b);
  }
}

void collect_vars(const Guard& g, std::vector<std::string>& out) {
  if (!g) return;
  if (g->op == GuardOp::Cmp) {
    collect_vars(g->lhs, out);
    collect_vars(g->rhs, out);
    return;
  }
  collect_vars(g->a, out);
  collect_vars(g->b, out);
}

Guard substitute(const Guard& g, const std::string& x, const Arith& e) {
  if (!g) return g;
  switch (g->op) {
    case GuardOp::True:
    case GuardOp::False:
      return g;
    case GuardOp::Cmp: {
      Arith l = substitute(g->lhs, x, e);
      Arith r = substitute(g->rhs, x, e);
      if (l == g->lhs && r == g->rhs) return g;
      return guard::cmp(l, g->cmp, r);
    }
    default: {
      Guard a = substitute(g->a, x, e);
      Guard b = substitute(g->b, x, e);
      if (a == g->a && b == g->b) return g;
      auto n = std::make_shared<GuardNode>(*g);
      n->a = std::move(a);
      n->b = std::move(b);
      return n;
    }
  }
}

const char* cmp_symbol(CmpOp op) {
  switch (op) {
    case CmpOp::Lt: return "<";
    case CmpOp::Le: return "<=";
    case CmpOp::Eq: return "=";
    case CmpOp::Ne: return "!=";
    case CmpOp::Ge: return ">=";
    case CmpOp::Gt: return ">";
  }
  return "?";
}

CmpOp parse_cmp(const std::string& s) {
  if (s == "<") return CmpOp::Lt;
  if (s == "<=" || s == "≤") return CmpOp::Le;
  if (s == "=" || s == "==") return CmpOp::Eq;
  if (s == "!=" || s == "≠") return CmpOp::Ne;
  if (s == ">=" || s == "≥") return CmpOp::Ge;
  if (s == ">") return CmpOp::Gt;
  throw Error("unknown comparison operator '" + s + "'");
}

namespace prog {

namespace {
std::shared_ptr<ProgramNode> make(StmtKind kind) {
  auto n = std::make_shared<ProgramNode>();
  n->kind = kind;
  return n;
}
}  // namespace

Program skip() {
  static const Program s = make(StmtKind::Skip);
  return s;
}

Program assign(std::string x, Arith e) {
  auto n = make(StmtKind::Assign);
  n->var = std::move(x);
  n->expr = std::move(e);
  return n;
}

Program random_assign(std::string x, Distribution d) {
  if (!d.continuous) {
    if (d.outcomes.empty()) throw Error("empty distribution");
    Rational total = 0;
    for (const auto& [w, v] : d.outcomes) {
      if (sgn(w) <= 0) throw Error("distribution weight " + to_string(w) + " is not positive");
      total += w;
    }
    if (total != 1) throw Error("distribution weights sum to " + to_string(total) + ", not 1");
  } else if (d.hi < d.lo) {
    throw Error("uniform(lo, hi) with hi < lo");
  }
  auto n = make(StmtKind::RandomAssign);
  n->var = std::move(x);
  n->dist = std::move(d);
  return n;
}

Program seq(std::vector<Program> parts) {
  std::vector<Program> flat;
  for (auto& p : parts) {
    if (p->kind == StmtKind::Seq) {
      flat.insert(flat.end(), p->children.begin(), p->children.end());
    } else {
      flat.push_back(std::move(p));
    }
  }
  if (flat.empty()) return skip();
  if (flat.size() == 1) return flat.front();
  auto n = make(StmtKind::Seq);
  n->children = std::move(flat);
  return n;
}

Program choice(Program left, Arith p, Program right) {
  if (p->op == ArithOp::Lit && (sgn(p->value) < 0 || p->value > 1)) {
    throw Error("probability " + to_string(p->value) + " outside [0,1]");
  }
  auto n = make(StmtKind::ProbChoice);
  n->expr = std::move(p);
  n->children = {std::move(left), std::move(right)};
  return n;
}

Program uniform(std::vector<Program> branches) {
  if (branches.size() < 2) throw Error("uniform choice needs at least two branches");
  auto n = make(StmtKind::UniformChoice);
  n->children = std::move(branches);
  return n;
}

Program ite(Guard g, Program then_branch, Program else_branch) {
  auto n = make(StmtKind::If);
  n->cond = std::move(g);
  n->children = {std::move(then_branch), std::move(else_branch)};
  return n;
}

Program loop(Guard g, Program body) {
  auto n = make(StmtKind::While);
  n->cond = std::move(g);
  n->children = {std::move(body)};
  return n;
}

Program diverge() { return loop(guard::truth(), skip()); }

}  // namespace prog

bool equal(const Program& a, const Program& b) {
  if (a == b) return true;
  if (!a || !b || a->kind != b->kind) return false;
  if (a->var != b->var || !equal(a->expr, b->expr) || !equal(a->cond, b->cond)) return false;
  if (a->kind == StmtKind::RandomAssign) {
    const auto& x = a->dist;
    const auto& y = b->dist;
    if (x.continuous != y.continuous || x.lo != y.lo || x.hi != y.hi || x.outcomes.size() != y.outcomes.size()) {
      return false;
    }
    for (std::size_t i = 0; i < x.outcomes.size(); ++i) {
      if (x.outcomes[i].first != y.outcomes[i].first || !equal(x.outcomes[i].second, y.outcomes[i].second)) {
        return false;
      }
    }
  }
  if (a->children.size() != b->children.size()) return false;
  for (std::size_t i = 0; i < a->children.size(); ++i) {
    if (!equal(a->children[i], b->children[i])) return false;
  }
  return true;
}

bool is_loop_free(const Program& p) {
  if (p->kind == StmtKind::While) return false;
  return std::all_of(p->children.begin(), p->children.end(), [](const Program& c) { return is_loop_free(c); });
}

bool has_continuous(const Program& p) {
  if (p->kind == StmtKind::RandomAssign && p->dist.continuous) return true;
  return std::any_of(p->children.begin(), p->children.end(), [](const Program& c) { return has_continuous(c); });
}

void collect_vars(const Program& p, std::vector<std::string>& out) {
  auto add_name = [&out](const std::string& x) {
    if (std::find(out.begin(), out.end(), x) == out.end()) out.push_back(x);
  };
  if (!p->var.empty()) add_name(p->var);
  collect_vars(p->expr, out);
  collect_vars(p->cond, out);
  for (const auto& [w, v] : p->dist.outcomes) collect_vars(v, out);
  for (const auto& c : p->children) collect_vars(c, out);
}

std::pair<Program, Program> split_loop(const Program& p) {
  if (p->kind == StmtKind::While) return {prog::skip(), p};
  if (p->kind == StmtKind::Seq && p->children.back()->kind == StmtKind::While) {
    std::vector<Program> prefix(p->children.begin(), p->children.end() - 1);
    return {prog::seq(std::move(prefix)), p->children.back()};
  }
  throw Error("program does not end in a while loop");
}

}  // namespace pgcl
