// Presburger terms and formulae: AST, builders, DSL parser, printer,
// substitution and SMT-LIB serialization.
#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ringverify {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& msg, int line, int column);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

class EvalError : public Error {
 public:
  using Error::Error;
};

namespace pb {

struct TermNode;
struct FormulaNode;
using Term = std::shared_ptr<const TermNode>;
using Formula = std::shared_ptr<const FormulaNode>;

enum class TermKind { Var, Const, Add, Sub, Scale, Mod };

/// Integer-valued term. Scale carries a nonnegative coefficient in `value`,
/// Mod a positive modulus in `value`.
struct TermNode {
  TermKind kind;
  std::string name;       // Var
  std::int64_t value = 0; // Const, Scale coefficient, Mod modulus
  Term lhs;               // Add, Sub, Scale operand, Mod operand
  Term rhs;               // Add, Sub
};

enum class CmpOp { Eq, Le, Ge, Lt, Gt, Ne };

enum class FormulaKind { Cmp, And, Or, Not, Exists };

struct FormulaNode {
  FormulaKind kind;
  CmpOp op = CmpOp::Eq;         // Cmp
  Term lhs, rhs;                // Cmp
  std::vector<Formula> args;    // And, Or; Not and Exists keep their operand in args[0]
  std::string bound;            // Exists
};

// Term builders.
Term var(std::string name);
Term constant(std::int64_t value);
Term add(Term a, Term b);
Term sub(Term a, Term b);
Term scale(std::int64_t coefficient, Term t);
Term mod(Term t, std::int64_t modulus);

// Formula builders. An empty conjunction is true, an empty disjunction false.
Formula cmp(Term lhs, CmpOp op, Term rhs);
Formula eq(Term lhs, Term rhs);
Formula ne(Term lhs, Term rhs);
Formula le(Term lhs, Term rhs);
Formula lt(Term lhs, Term rhs);
Formula ge(Term lhs, Term rhs);
Formula gt(Term lhs, Term rhs);
Formula conj(std::vector<Formula> args);
Formula disj(std::vector<Formula> args);
Formula negate(Formula f);
Formula exists(std::string bound, Formula body);
Formula exists(const std::vector<std::string>& bound, Formula body);
Formula truth();
Formula falsity();

std::string_view op_symbol(CmpOp op);
CmpOp negated(CmpOp op);

/// Parses one formula of the protocol DSL. `#` starts a comment running to
/// end of line. Bound variables are renamed apart from each other and from
/// the free variables; names are kept when they do not clash.
Formula parse_formula(std::string_view text);

/// Human-readable DSL rendering; parse_formula(print(f)) == f structurally
/// for formulae built from non-empty connectives.
std::string print(const Term& t);
std::string print(const Formula& f);

bool equal(const Term& a, const Term& b);
bool equal(const Formula& a, const Formula& b);

std::set<std::string> free_vars(const Term& t);
std::set<std::string> free_vars(const Formula& f);
std::set<std::string> bound_vars(const Formula& f);

bool is_quantifier_free(const Formula& f);

/// Simultaneous capture-free substitution of free variables.
/// Throws Error when a key is bound in `f` or a replacement would be captured.
Formula substitute(const Formula& f, const std::map<std::string, Term>& m);
Term substitute(const Term& t, const std::map<std::string, Term>& m);

/// Negation normal form: Not only survives in front of nothing; negated
/// comparisons are flipped and De Morgan applied. Throws Error on a Not over
/// an Exists.
Formula nnf(const Formula& f);

/// SMT-LIB 2 term over Int. Each variable of `nonneg_vars` and every bound
/// variable gets a conjoined `(>= v 0)`.
std::string to_smtlib(const Formula& f, const std::set<std::string>& nonneg_vars = {});
std::string to_smtlib(const Term& t);

}  // namespace pb
}  // namespace ringverify
