// Evaluation of Presburger formulae under a valuation, with existential
// quantifiers ranging over [0, quantifier_bound].
#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "ringverify/presburger.hpp"

namespace ringverify::pb {

using Valuation = std::map<std::string, std::int64_t>;

/// Compiled form of a formula, reusable across many valuations.
///
/// Existentials are decided by a backtracking search over the negation
/// normal form: equalities with a single unknown are solved outright,
/// disjunctions are split, and only variables that remain unconstrained by
/// equalities are enumerated over [0, bound]. The answer is identical to
/// naive enumeration of every bound variable.
class Evaluator {
 public:
  explicit Evaluator(const Formula& f);

  /// Free variables in slot order.
  const std::vector<std::string>& free_variables() const { return free_names_; }

  /// Slot of a free variable, or -1 when the name is not free.
  int slot(const std::string& name) const;

  /// `values[i]` binds free_variables()[i].
  bool operator()(std::span<const std::int64_t> values, std::int64_t quantifier_bound) const;

  /// Throws EvalError when a free variable is missing from `v`.
  bool operator()(const Valuation& v, std::int64_t quantifier_bound) const;

  /// Cache the value of every subformula whose quantified variables occur
  /// nowhere else, keyed by the free variables it reads. Pays off when many
  /// valuations share most values. Not safe for concurrent calls.
  void set_memoize(bool on);

  struct CTerm {
    TermKind kind;
    std::int64_t value = 0;
    int slot = -1;
    int a = -1;
    int b = -1;
  };
  struct CNode {
    FormulaKind kind;  // Cmp, And or Or only
    CmpOp op = CmpOp::Eq;
    int lhs = -1;
    int rhs = -1;
    std::vector<int> kids;
    std::vector<int> bound_slots;  // quantified slots occurring below
    std::vector<int> free_slots;
    int first = -1;       // smallest node index in this subtree
    bool closed = false;  // owns all occurrences of its quantified slots
    // lhs - rhs as constant + sum of coefficient * slot, when no mod occurs
    bool linear = false;
    std::int64_t constant = 0;
    std::vector<std::pair<int, std::int64_t>> coeffs;
  };

 private:
  int compile_term(const Term& t, const std::map<std::string, int>& scope);
  int compile(const Formula& f, std::map<std::string, int>& scope);
  void collect_slots(int t, std::vector<int>& bound, std::vector<int>& free) const;
  bool linearize(int t, std::int64_t mult, CNode& out) const;
  void mark_closed();

  struct KeyHash {
    std::size_t operator()(const std::vector<std::int64_t>& k) const;
  };

  std::vector<CTerm> terms_;
  std::vector<CNode> nodes_;
  std::vector<std::string> free_names_;
  int slot_count_ = 0;
  int root_ = -1;
  bool memoize_ = false;
  using Memo = std::unordered_map<std::vector<std::int64_t>, bool, KeyHash>;
  mutable std::vector<Memo> memo_;  // per node, only for closed ones

  friend class Search;
};

/// One-shot convenience over Evaluator.
bool eval(const Formula& f, const Valuation& v, std::int64_t quantifier_bound);

}  // namespace ringverify::pb
