#include <string>

#include "pgcl/syntax.hpp"
#include "print_util.hpp"

namespace pgcl {

namespace detail {

int precedence(const Arith& a) {
  switch (a->op) {
    case ArithOp::Lit:
      if (!is_integer(a->value)) return 2;
      return sgn(a->value) < 0 ? 3 : 5;
    case ArithOp::Var:
    case ArithOp::Min:
    case ArithOp::Max:
    case ArithOp::Abs:
    case ArithOp::Floor:
      return 5;
    case ArithOp::Neg:
      return 3;
    case ArithOp::Add:
    case ArithOp::Sub:
      return 1;
    case ArithOp::Mul:
    case ArithOp::Div:
      return 2;
    case ArithOp::Pow:
      return 4;
  }
  return 0;
}

}  // namespace detail

namespace {

using detail::precedence;

std::string wrap(const Arith& a, bool parens) {
  std::string s = pretty_print(a);
  return parens ? "(" + s + ")" : s;
}

void print_guard(const Guard& g, int context, std::string& out) {
  // context: 0 top/or, 1 and, 2 not
  switch (g->op) {
    case GuardOp::True:
      out += "true";
      return;
    case GuardOp::False:
      out += "false";
      return;
    case GuardOp::Cmp:
      out += pretty_print(g->lhs);
      out += ' ';
      out += cmp_symbol(g->cmp);
      out += ' ';
      out += pretty_print(g->rhs);
      return;
    case GuardOp::Not:
      out += '!';
      if (g->a->op == GuardOp::True || g->a->op == GuardOp::False) {
        print_guard(g->a, 2, out);
      } else {
        out += '(';
        print_guard(g->a, 0, out);
        out += ')';
      }
      return;
    case GuardOp::And: {
      bool parens = context > 1;
      if (parens) out += '(';
      print_guard(g->a, 1, out);
      out += " & ";
      // And is left-associative; a right-nested conjunction needs parentheses.
      print_guard(g->b, 2, out);
      if (parens) out += ')';
      return;
    }
    case GuardOp::Or: {
      bool parens = context > 0;
      if (parens) out += '(';
      print_guard(g->a, 0, out);
      out += " | ";
      print_guard(g->b, 1, out);
      if (parens) out += ')';
      return;
    }
  }
}

void indent(std::string& out, int depth) { out.append(static_cast<std::size_t>(depth) * 2, ' '); }

void print_program(const Program& p, int depth, std::string& out);

void print_block(const Program& p, int depth, std::string& out) {
  out += "{\n";
  print_program(p, depth + 1, out);
  out += '\n';
  indent(out, depth);
  out += '}';
}

void print_program(const Program& p, int depth, std::string& out) {
  switch (p->kind) {
    case StmtKind::Skip:
      indent(out, depth);
      out += "skip";
      return;
    case StmtKind::Assign:
      indent(out, depth);
      out += p->var + " := " + pretty_print(p->expr);
      return;
    case StmtKind::RandomAssign:
      indent(out, depth);
      out += p->var + " :~ ";
      if (p->dist.continuous) {
        out += "uniform(" + pretty_print(arith::lit(p->dist.lo)) + ", " + pretty_print(arith::lit(p->dist.hi)) + ")";
      } else {
        out += "dist{";
        bool first = true;
        for (const auto& [w, v] : p->dist.outcomes) {
          if (!first) out += ", ";
          first = false;
          out += pretty_print(arith::lit(w)) + ": " + pretty_print(v);
        }
        out += '}';
      }
      return;
    case StmtKind::Seq: {
      bool first = true;
      for (const auto& c : p->children) {
        if (!first) out += ";\n";
        first = false;
        print_program(c, depth, out);
      }
      return;
    }
    case StmtKind::ProbChoice:
      indent(out, depth);
      print_block(p->children[0], depth, out);
      out += " [" + pretty_print(p->expr) + "] ";
      print_block(p->children[1], depth, out);
      return;
    case StmtKind::UniformChoice: {
      indent(out, depth);
      bool first = true;
      for (const auto& c : p->children) {
        if (!first) out += " (+) ";
        first = false;
        print_block(c, depth, out);
      }
      return;
    }
    case StmtKind::If:
      indent(out, depth);
      out += "if (" + pretty_print(p->cond) + ") ";
      print_block(p->children[0], depth, out);
      if (p->children[1]->kind != StmtKind::Skip) {
        out += " else ";
        print_block(p->children[1], depth, out);
      }
      return;
    case StmtKind::While:
      indent(out, depth);
      out += "while (" + pretty_print(p->cond) + ") ";
      print_block(p->children[0], depth, out);
      return;
  }
}

}  // namespace

std::string pretty_print(const Arith& a) {
  switch (a->op) {
    case ArithOp::Lit:
      return to_string(a->value);
    case ArithOp::Var:
      return a->name;
    case ArithOp::Neg:
      return "-" + wrap(a->lhs, precedence(a->lhs) < 3);
    case ArithOp::Add:
    case ArithOp::Sub:
    case ArithOp::Mul:
    case ArithOp::Div: {
      int p = precedence(a);
      const char* sym = a->op == ArithOp::Add ? " + " : a->op == ArithOp::Sub ? " - " : a->op == ArithOp::Mul ? " * " : " / ";
      return wrap(a->lhs, precedence(a->lhs) < p) + sym + wrap(a->rhs, precedence(a->rhs) <= p);
    }
    case ArithOp::Pow:
      return wrap(a->lhs, precedence(a->lhs) <= 4) + "^" + wrap(a->rhs, precedence(a->rhs) < 3);
    case ArithOp::Min:
      return "min(" + pretty_print(a->lhs) + ", " + pretty_print(a->rhs) + ")";
    case ArithOp::Max:
      return "max(" + pretty_print(a->lhs) + ", " + pretty_print(a->rhs) + ")";
    case ArithOp::Abs:
      return "abs(" + pretty_print(a->lhs) + ")";
    case ArithOp::Floor:
      return "floor(" + pretty_print(a->lhs) + ")";
  }
  return "?";
}

std::string pretty_print(const Guard& g) {
  std::string out;
  print_guard(g, 0, out);
  return out;
}

std::string pretty_print(const Program& p) {
  std::string out;
  print_program(p, 0, out);
  return out;
}

}  // namespace pgcl
