#include "ringverify/presburger.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <optional>
#include <sstream>

namespace ringverify {

ParseError::ParseError(const std::string& msg, int line, int column)
    : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + msg),
      line_(line),
      column_(column) {}

namespace pb {

Term var(std::string name) {
  if (name.empty()) throw Error("empty variable name");
  return std::make_shared<const TermNode>(TermNode{TermKind::Var, std::move(name), 0, nullptr, nullptr});
}

Term constant(std::int64_t value) {
  if (value < 0) throw Error("constants are natural numbers, got " + std::to_string(value));
  return std::make_shared<const TermNode>(TermNode{TermKind::Const, {}, value, nullptr, nullptr});
}

Term add(Term a, Term b) {
  return std::make_shared<const TermNode>(TermNode{TermKind::Add, {}, 0, std::move(a), std::move(b)});
}

Term sub(Term a, Term b) {
  return std::make_shared<const TermNode>(TermNode{TermKind::Sub, {}, 0, std::move(a), std::move(b)});
}

Term scale(std::int64_t coefficient, Term t) {
  if (coefficient < 0) throw Error("scalar coefficients are natural numbers");
  return std::make_shared<const TermNode>(TermNode{TermKind::Scale, {}, coefficient, std::move(t), nullptr});
}

Term mod(Term t, std::int64_t modulus) {
  if (modulus < 1) throw Error("modulus must be at least 1, got " + std::to_string(modulus));
  return std::make_shared<const TermNode>(TermNode{TermKind::Mod, {}, modulus, std::move(t), nullptr});
}

Formula cmp(Term lhs, CmpOp op, Term rhs) {
  auto n = std::make_shared<FormulaNode>();
  n->kind = FormulaKind::Cmp;
  n->op = op;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

Formula eq(Term lhs, Term rhs) { return cmp(std::move(lhs), CmpOp::Eq, std::move(rhs)); }
Formula ne(Term lhs, Term rhs) { return cmp(std::move(lhs), CmpOp::Ne, std::move(rhs)); }
Formula le(Term lhs, Term rhs) { return cmp(std::move(lhs), CmpOp::Le, std::move(rhs)); }
Formula lt(Term lhs, Term rhs) { return cmp(std::move(lhs), CmpOp::Lt, std::move(rhs)); }
Formula ge(Term lhs, Term rhs) { return cmp(std::move(lhs), CmpOp::Ge, std::move(rhs)); }
Formula gt(Term lhs, Term rhs) { return cmp(std::move(lhs), CmpOp::Gt, std::move(rhs)); }

namespace {

Formula connective(FormulaKind kind, std::vector<Formula> args) {
  std::vector<Formula> flat;
  flat.reserve(args.size());
  for (auto& a : args) {
    if (!a) throw Error("null formula operand");
    if (a->kind == kind) {
      flat.insert(flat.end(), a->args.begin(), a->args.end());
    } else {
      flat.push_back(std::move(a));
    }
  }
  if (flat.size() == 1) return flat.front();
  auto n = std::make_shared<FormulaNode>();
  n->kind = kind;
  n->args = std::move(flat);
  return n;
}

}  // namespace

Formula conj(std::vector<Formula> args) { return connective(FormulaKind::And, std::move(args)); }
Formula disj(std::vector<Formula> args) { return connective(FormulaKind::Or, std::move(args)); }

Formula negate(Formula f) {
  auto n = std::make_shared<FormulaNode>();
  n->kind = FormulaKind::Not;
  n->args = {std::move(f)};
  return n;
}

Formula exists(std::string bound, Formula body) {
  auto n = std::make_shared<FormulaNode>();
  n->kind = FormulaKind::Exists;
  n->bound = std::move(bound);
  n->args = {std::move(body)};
  return n;
}

Formula exists(const std::vector<std::string>& bound, Formula body) {
  for (auto it = bound.rbegin(); it != bound.rend(); ++it) body = exists(*it, std::move(body));
  return body;
}

Formula truth() { return conj({}); }
Formula falsity() { return disj({}); }

std::string_view op_symbol(CmpOp op) {
  switch (op) {
    case CmpOp::Eq: return "=";
    case CmpOp::Le: return "<=";
    case CmpOp::Ge: return ">=";
    case CmpOp::Lt: return "<";
    case CmpOp::Gt: return ">";
    case CmpOp::Ne: return "!=";
  }
  return "?";
}

CmpOp negated(CmpOp op) {
  switch (op) {
    case CmpOp::Eq: return CmpOp::Ne;
    case CmpOp::Ne: return CmpOp::Eq;
    case CmpOp::Le: return CmpOp::Gt;
    case CmpOp::Gt: return CmpOp::Le;
    case CmpOp::Ge: return CmpOp::Lt;
    case CmpOp::Lt: return CmpOp::Ge;
  }
  return op;
}

// ---------------------------------------------------------------------------
// Printing

namespace {

enum class TermLevel { Sum, ModOperand, Factor };

void print_term(std::ostream& os, const Term& t, TermLevel level) {
  switch (t->kind) {
    case TermKind::Var: os << t->name; return;
    case TermKind::Const: os << t->value; return;
    case TermKind::Add:
    case TermKind::Sub: {
      bool paren = level != TermLevel::Sum;
      if (paren) os << '(';
      print_term(os, t->lhs, TermLevel::Sum);
      os << (t->kind == TermKind::Add ? " + " : " - ");
      // right operand sits at mterm level: sums there need parentheses
      bool rparen = t->rhs->kind == TermKind::Add || t->rhs->kind == TermKind::Sub;
      if (rparen) os << '(';
      print_term(os, t->rhs, TermLevel::Sum);
      if (rparen) os << ')';
      if (paren) os << ')';
      return;
    }
    case TermKind::Scale:
      os << t->value << '*';
      print_term(os, t->lhs, TermLevel::Factor);
      return;
    case TermKind::Mod: {
      bool paren = level == TermLevel::Factor || level == TermLevel::ModOperand;
      if (paren) os << '(';
      print_term(os, t->lhs, TermLevel::ModOperand);
      os << " mod " << t->value;
      if (paren) os << ')';
      return;
    }
  }
}

enum class FLevel { Disj, Conj, Unary };

void print_formula(std::ostream& os, const Formula& f, FLevel level) {
  switch (f->kind) {
    case FormulaKind::Cmp:
      print_term(os, f->lhs, TermLevel::Sum);
      os << ' ' << op_symbol(f->op) << ' ';
      print_term(os, f->rhs, TermLevel::Sum);
      return;
    case FormulaKind::And:
    case FormulaKind::Or: {
      if (f->args.empty()) {
        os << (f->kind == FormulaKind::And ? "0 = 0" : "0 = 1");
        return;
      }
      bool is_and = f->kind == FormulaKind::And;
      bool paren = is_and ? level == FLevel::Unary : level != FLevel::Disj;
      if (paren) os << '(';
      for (std::size_t i = 0; i < f->args.size(); ++i) {
        if (i) os << (is_and ? " and " : " or ");
        print_formula(os, f->args[i], is_and ? FLevel::Unary : FLevel::Conj);
      }
      if (paren) os << ')';
      return;
    }
    case FormulaKind::Not:
      os << "not ";
      print_formula(os, f->args[0], FLevel::Unary);
      return;
    case FormulaKind::Exists:
      os << "exists " << f->bound << " . ";
      print_formula(os, f->args[0], FLevel::Unary);
      return;
  }
}

}  // namespace

std::string print(const Term& t) {
  std::ostringstream os;
  print_term(os, t, TermLevel::Sum);
  return os.str();
}

std::string print(const Formula& f) {
  std::ostringstream os;
  print_formula(os, f, FLevel::Disj);
  return os.str();
}

// ---------------------------------------------------------------------------
// Structural queries

bool equal(const Term& a, const Term& b) {
  if (a == b) return true;
  if (!a || !b || a->kind != b->kind) return false;
  switch (a->kind) {
    case TermKind::Var: return a->name == b->name;
    case TermKind::Const: return a->value == b->value;
    case TermKind::Add:
    case TermKind::Sub: return equal(a->lhs, b->lhs) && equal(a->rhs, b->rhs);
    case TermKind::Scale:
    case TermKind::Mod: return a->value == b->value && equal(a->lhs, b->lhs);
  }
  return false;
}

bool equal(const Formula& a, const Formula& b) {
  if (a == b) return true;
  if (!a || !b || a->kind != b->kind) return false;
  switch (a->kind) {
    case FormulaKind::Cmp: return a->op == b->op && equal(a->lhs, b->lhs) && equal(a->rhs, b->rhs);
    case FormulaKind::Exists:
      if (a->bound != b->bound) return false;
      [[fallthrough]];
    case FormulaKind::And:
    case FormulaKind::Or:
    case FormulaKind::Not:
      if (a->args.size() != b->args.size()) return false;
      for (std::size_t i = 0; i < a->args.size(); ++i)
        if (!equal(a->args[i], b->args[i])) return false;
      return true;
  }
  return false;
}

namespace {

void collect_term_vars(const Term& t, std::set<std::string>& out) {
  switch (t->kind) {
    case TermKind::Var: out.insert(t->name); return;
    case TermKind::Const: return;
    case TermKind::Add:
    case TermKind::Sub:
      collect_term_vars(t->lhs, out);
      collect_term_vars(t->rhs, out);
      return;
    case TermKind::Scale:
    case TermKind::Mod: collect_term_vars(t->lhs, out); return;
  }
}

void collect_free(const Formula& f, std::set<std::string>& bound, std::set<std::string>& out) {
  switch (f->kind) {
    case FormulaKind::Cmp: {
      std::set<std::string> vs;
      collect_term_vars(f->lhs, vs);
      collect_term_vars(f->rhs, vs);
      for (auto& v : vs)
        if (!bound.count(v)) out.insert(v);
      return;
    }
    case FormulaKind::Exists: {
      bool fresh = bound.insert(f->bound).second;
      collect_free(f->args[0], bound, out);
      if (fresh) bound.erase(f->bound);
      return;
    }
    default:
      for (auto& a : f->args) collect_free(a, bound, out);
  }
}

void collect_bound(const Formula& f, std::set<std::string>& out) {
  if (f->kind == FormulaKind::Exists) out.insert(f->bound);
  for (auto& a : f->args) collect_bound(a, out);
}

}  // namespace

std::set<std::string> free_vars(const Term& t) {
  std::set<std::string> out;
  collect_term_vars(t, out);
  return out;
}

std::set<std::string> free_vars(const Formula& f) {
  std::set<std::string> bound, out;
  collect_free(f, bound, out);
  return out;
}

std::set<std::string> bound_vars(const Formula& f) {
  std::set<std::string> out;
  collect_bound(f, out);
  return out;
}

bool is_quantifier_free(const Formula& f) {
  if (f->kind == FormulaKind::Exists) return false;
  return std::all_of(f->args.begin(), f->args.end(), [](const Formula& a) { return is_quantifier_free(a); });
}

// ---------------------------------------------------------------------------
// Substitution and normal forms

Term substitute(const Term& t, const std::map<std::string, Term>& m) {
  switch (t->kind) {
    case TermKind::Var: {
      auto it = m.find(t->name);
      return it == m.end() ? t : it->second;
    }
    case TermKind::Const: return t;
    case TermKind::Add: return add(substitute(t->lhs, m), substitute(t->rhs, m));
    case TermKind::Sub: return sub(substitute(t->lhs, m), substitute(t->rhs, m));
    case TermKind::Scale: return scale(t->value, substitute(t->lhs, m));
    case TermKind::Mod: return mod(substitute(t->lhs, m), t->value);
  }
  return t;
}

namespace {

Formula substitute_unchecked(const Formula& f, const std::map<std::string, Term>& m) {
  switch (f->kind) {
    case FormulaKind::Cmp: return cmp(substitute(f->lhs, m), f->op, substitute(f->rhs, m));
    case FormulaKind::And:
    case FormulaKind::Or: {
      std::vector<Formula> args;
      args.reserve(f->args.size());
      for (auto& a : f->args) args.push_back(substitute_unchecked(a, m));
      auto n = std::make_shared<FormulaNode>(*f);
      n->args = std::move(args);
      return n;
    }
    case FormulaKind::Not: return negate(substitute_unchecked(f->args[0], m));
    case FormulaKind::Exists: return exists(f->bound, substitute_unchecked(f->args[0], m));
  }
  return f;
}

}  // namespace

Formula substitute(const Formula& f, const std::map<std::string, Term>& m) {
  auto bound = bound_vars(f);
  for (auto& [name, term] : m) {
    if (bound.count(name)) throw Error("cannot substitute bound variable '" + name + "'");
    for (auto& v : free_vars(term))
      if (bound.count(v)) throw Error("substitution of '" + name + "' would capture '" + v + "'");
  }
  return substitute_unchecked(f, m);
}

namespace {

Formula nnf_impl(const Formula& f, bool negative) {
  switch (f->kind) {
    case FormulaKind::Cmp:
      if (!negative) return f;
      return cmp(f->lhs, negated(f->op), f->rhs);
    case FormulaKind::And:
    case FormulaKind::Or: {
      std::vector<Formula> args;
      args.reserve(f->args.size());
      for (auto& a : f->args) args.push_back(nnf_impl(a, negative));
      bool make_and = (f->kind == FormulaKind::And) != negative;
      return make_and ? conj(std::move(args)) : disj(std::move(args));
    }
    case FormulaKind::Not: return nnf_impl(f->args[0], !negative);
    case FormulaKind::Exists:
      if (negative) throw Error("negation over an existential quantifier is outside the fragment");
      return exists(f->bound, nnf_impl(f->args[0], false));
  }
  return f;
}

}  // namespace

Formula nnf(const Formula& f) { return nnf_impl(f, false); }

// ---------------------------------------------------------------------------
// SMT-LIB

namespace {

void smt_term(std::ostream& os, const Term& t) {
  switch (t->kind) {
    case TermKind::Var: os << t->name; return;
    case TermKind::Const: os << t->value; return;
    case TermKind::Add:
    case TermKind::Sub:
      os << (t->kind == TermKind::Add ? "(+ " : "(- ");
      smt_term(os, t->lhs);
      os << ' ';
      smt_term(os, t->rhs);
      os << ')';
      return;
    case TermKind::Scale:
      os << "(* " << t->value << ' ';
      smt_term(os, t->lhs);
      os << ')';
      return;
    case TermKind::Mod:
      os << "(mod ";
      smt_term(os, t->lhs);
      os << ' ' << t->value << ')';
      return;
  }
}

void smt_formula(std::ostream& os, const Formula& f) {
  switch (f->kind) {
    case FormulaKind::Cmp:
      os << '(' << (f->op == CmpOp::Ne ? std::string_view("distinct") : op_symbol(f->op)) << ' ';
      smt_term(os, f->lhs);
      os << ' ';
      smt_term(os, f->rhs);
      os << ')';
      return;
    case FormulaKind::And:
    case FormulaKind::Or:
      if (f->args.empty()) {
        os << (f->kind == FormulaKind::And ? "true" : "false");
        return;
      }
      if (f->args.size() == 1) {
        smt_formula(os, f->args[0]);
        return;
      }
      os << (f->kind == FormulaKind::And ? "(and" : "(or");
      for (auto& a : f->args) {
        os << ' ';
        smt_formula(os, a);
      }
      os << ')';
      return;
    case FormulaKind::Not:
      os << "(not ";
      smt_formula(os, f->args[0]);
      os << ')';
      return;
    case FormulaKind::Exists:
      os << "(exists ((" << f->bound << " Int)) (and (>= " << f->bound << " 0) ";
      smt_formula(os, f->args[0]);
      os << "))";
      return;
  }
}

}  // namespace

std::string to_smtlib(const Term& t) {
  std::ostringstream os;
  smt_term(os, t);
  return os.str();
}

std::string to_smtlib(const Formula& f, const std::set<std::string>& nonneg_vars) {
  std::ostringstream os;
  if (nonneg_vars.empty()) {
    smt_formula(os, f);
    return os.str();
  }
  os << "(and";
  for (auto& v : nonneg_vars) os << " (>= " << v << " 0)";
  os << ' ';
  smt_formula(os, f);
  os << ')';
  return os.str();
}

}  // namespace pb
}  // namespace ringverify
