#include "ringverify/evaluator.hpp"

#include <algorithm>
#include <array>
#include <limits>

namespace ringverify::pb {
namespace {

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_add_overflow(a, b, &r)) throw EvalError("arithmetic overflow");
  return r;
}

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_mul_overflow(a, b, &r)) throw EvalError("arithmetic overflow");
  return r;
}

std::int64_t floor_mod(std::int64_t a, std::int64_t m) {
  std::int64_t r = a % m;
  return r < 0 ? r + m : r;
}

bool compare(std::int64_t diff, CmpOp op) {
  switch (op) {
    case CmpOp::Eq: return diff == 0;
    case CmpOp::Ne: return diff != 0;
    case CmpOp::Le: return diff <= 0;
    case CmpOp::Ge: return diff >= 0;
    case CmpOp::Lt: return diff < 0;
    case CmpOp::Gt: return diff > 0;
  }
  return false;
}

}  // namespace

Evaluator::Evaluator(const Formula& f) {
  auto normal = nnf(f);
  std::map<std::string, int> scope;
  for (auto& name : free_vars(normal)) {
    scope[name] = slot_count_++;
    free_names_.push_back(name);
  }
  root_ = compile(normal, scope);
  mark_closed();
}

void Evaluator::mark_closed() {
  // nodes are stored in post-order, so a subtree is the index range [first, n]
  std::vector<int> lo(slot_count_, std::numeric_limits<int>::max()), hi(slot_count_, -1);
  for (int n = 0; n < static_cast<int>(nodes_.size()); ++n) {
    auto& node = nodes_[n];
    node.first = n;
    for (int k : node.kids) node.first = std::min(node.first, nodes_[k].first);
    if (node.kind != FormulaKind::Cmp) continue;
    for (int b : node.bound_slots) {
      lo[b] = std::min(lo[b], n);
      hi[b] = std::max(hi[b], n);
    }
  }
  for (int n = 0; n < static_cast<int>(nodes_.size()); ++n) {
    auto& node = nodes_[n];
    if (node.kind == FormulaKind::Cmp || node.bound_slots.empty()) continue;
    node.closed = std::all_of(node.bound_slots.begin(), node.bound_slots.end(),
                              [&](int b) { return lo[b] >= node.first && hi[b] <= n; });
  }
}

void Evaluator::set_memoize(bool on) {
  memoize_ = on;
  memo_.assign(on ? nodes_.size() : 0, {});
}

std::size_t Evaluator::KeyHash::operator()(const std::vector<std::int64_t>& k) const {
  std::size_t h = k.size();
  for (auto x : k) h ^= std::hash<std::int64_t>{}(x) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

int Evaluator::slot(const std::string& name) const {
  auto it = std::find(free_names_.begin(), free_names_.end(), name);
  return it == free_names_.end() ? -1 : static_cast<int>(it - free_names_.begin());
}

int Evaluator::compile_term(const Term& t, const std::map<std::string, int>& scope) {
  CTerm c;
  c.kind = t->kind;
  c.value = t->value;
  switch (t->kind) {
    case TermKind::Var: c.slot = scope.at(t->name); break;
    case TermKind::Const: break;
    case TermKind::Add:
    case TermKind::Sub:
      c.a = compile_term(t->lhs, scope);
      c.b = compile_term(t->rhs, scope);
      break;
    case TermKind::Scale:
    case TermKind::Mod: c.a = compile_term(t->lhs, scope); break;
  }
  terms_.push_back(c);
  return static_cast<int>(terms_.size()) - 1;
}

int Evaluator::compile(const Formula& f, std::map<std::string, int>& scope) {
  switch (f->kind) {
    case FormulaKind::Cmp: {
      CNode n;
      n.kind = FormulaKind::Cmp;
      n.op = f->op;
      n.lhs = compile_term(f->lhs, scope);
      n.rhs = compile_term(f->rhs, scope);
      n.linear = linearize(n.lhs, 1, n) && linearize(n.rhs, -1, n);
      std::erase_if(n.coeffs, [](auto& p) { return p.second == 0; });
      collect_slots(n.lhs, n.bound_slots, n.free_slots);
      collect_slots(n.rhs, n.bound_slots, n.free_slots);
      for (auto* v : {&n.bound_slots, &n.free_slots}) {
        std::sort(v->begin(), v->end());
        v->erase(std::unique(v->begin(), v->end()), v->end());
      }
      nodes_.push_back(std::move(n));
      return static_cast<int>(nodes_.size()) - 1;
    }
    case FormulaKind::And:
    case FormulaKind::Or: {
      CNode n;
      n.kind = f->kind;
      for (auto& a : f->args) n.kids.push_back(compile(a, scope));
      for (int k : n.kids) {
        const auto& ks = nodes_[k].bound_slots;
        n.bound_slots.insert(n.bound_slots.end(), ks.begin(), ks.end());
        const auto& fs = nodes_[k].free_slots;
        n.free_slots.insert(n.free_slots.end(), fs.begin(), fs.end());
      }
      for (auto* v : {&n.bound_slots, &n.free_slots}) {
        std::sort(v->begin(), v->end());
        v->erase(std::unique(v->begin(), v->end()), v->end());
      }
      nodes_.push_back(std::move(n));
      return static_cast<int>(nodes_.size()) - 1;
    }
    case FormulaKind::Exists: {
      // positive occurrence after NNF: the binder becomes a search variable
      auto inner = scope;
      inner[f->bound] = slot_count_++;
      return compile(f->args[0], inner);
    }
    case FormulaKind::Not: break;
  }
  throw EvalError("negation left after normalization");
}

void Evaluator::collect_slots(int t, std::vector<int>& bound, std::vector<int>& free) const {
  const auto& c = terms_[t];
  if (c.kind == TermKind::Var) (c.slot >= static_cast<int>(free_names_.size()) ? bound : free).push_back(c.slot);
  if (c.a >= 0) collect_slots(c.a, bound, free);
  if (c.b >= 0) collect_slots(c.b, bound, free);
}

bool Evaluator::linearize(int t, std::int64_t mult, CNode& out) const {
  const auto& c = terms_[t];
  switch (c.kind) {
    case TermKind::Var: {
      auto it = std::find_if(out.coeffs.begin(), out.coeffs.end(), [&](auto& p) { return p.first == c.slot; });
      if (it == out.coeffs.end()) {
        out.coeffs.emplace_back(c.slot, mult);
      } else {
        it->second = checked_add(it->second, mult);
      }
      return true;
    }
    case TermKind::Const: out.constant = checked_add(out.constant, checked_mul(mult, c.value)); return true;
    case TermKind::Add: return linearize(c.a, mult, out) && linearize(c.b, mult, out);
    case TermKind::Sub: return linearize(c.a, mult, out) && linearize(c.b, checked_mul(-1, mult), out);
    case TermKind::Scale: return linearize(c.a, checked_mul(mult, c.value), out);
    case TermKind::Mod: return false;
  }
  return false;
}

class Search {
 public:
  Search(const Evaluator& ev, std::int64_t bound)
      : ev_(ev), bound_(bound), val_(ev.slot_count_, 0), known_(ev.slot_count_, 0) {}

  void bind(int slot, std::int64_t v) {
    val_[slot] = v;
    known_[slot] = 1;
  }

  bool solve(const std::vector<int>& goals) {
    std::size_t mark = trail_.size();
    if (solve_inner(goals)) return true;
    while (trail_.size() > mark) {
      known_[trail_.back()] = 0;
      trail_.pop_back();
    }
    return false;
  }

 private:
  enum class Status { True, False, Solved, Unknown };

  struct Linear {
    std::int64_t constant = 0;
    // unknown slots only; overflowing the small buffer just makes the atom opaque
    std::array<std::pair<int, std::int64_t>, 6> coeffs{};
    int count = 0;
    bool opaque = false;  // unknown under a mod, or too many unknowns
  };

  void assign(int slot, std::int64_t v) {
    val_[slot] = v;
    known_[slot] = 1;
    trail_.push_back(slot);
  }

  std::int64_t value(int t) const {
    const auto& c = ev_.terms_[t];
    switch (c.kind) {
      case TermKind::Var: return val_[c.slot];
      case TermKind::Const: return c.value;
      case TermKind::Add: return checked_add(value(c.a), value(c.b));
      case TermKind::Sub: return checked_add(value(c.a), checked_mul(-1, value(c.b)));
      case TermKind::Scale: return checked_mul(c.value, value(c.a));
      case TermKind::Mod: return floor_mod(value(c.a), c.value);
    }
    return 0;
  }

  bool ground(int t) const {
    const auto& c = ev_.terms_[t];
    switch (c.kind) {
      case TermKind::Var: return known_[c.slot];
      case TermKind::Const: return true;
      case TermKind::Add:
      case TermKind::Sub: return ground(c.a) && ground(c.b);
      case TermKind::Scale:
      case TermKind::Mod: return ground(c.a);
    }
    return true;
  }

  void linearize(int t, std::int64_t mult, Linear& out) const {
    const auto& c = ev_.terms_[t];
    switch (c.kind) {
      case TermKind::Var:
        if (known_[c.slot]) {
          out.constant = checked_add(out.constant, checked_mul(mult, val_[c.slot]));
        } else {
          auto end = out.coeffs.begin() + out.count;
          auto it = std::find_if(out.coeffs.begin(), end, [&](auto& p) { return p.first == c.slot; });
          if (it == end) {
            if (out.count == static_cast<int>(out.coeffs.size())) {
              out.opaque = true;
            } else {
              out.coeffs[out.count++] = {c.slot, mult};
            }
          } else {
            it->second = checked_add(it->second, mult);
          }
        }
        return;
      case TermKind::Const: out.constant = checked_add(out.constant, checked_mul(mult, c.value)); return;
      case TermKind::Add:
        linearize(c.a, mult, out);
        linearize(c.b, mult, out);
        return;
      case TermKind::Sub:
        linearize(c.a, mult, out);
        linearize(c.b, checked_mul(-1, mult), out);
        return;
      case TermKind::Scale: linearize(c.a, checked_mul(mult, c.value), out); return;
      case TermKind::Mod:
        if (ground(c.a)) {
          out.constant = checked_add(out.constant, checked_mul(mult, floor_mod(value(c.a), c.value)));
        } else {
          out.opaque = true;
        }
        return;
    }
  }

  bool ground_node(int n) const {
    for (int s : ev_.nodes_[n].bound_slots)
      if (!known_[s]) return false;
    return true;
  }

  bool truth(int n) const {
    const auto& node = ev_.nodes_[n];
    switch (node.kind) {
      case FormulaKind::Cmp: return compare(checked_add(value(node.lhs), checked_mul(-1, value(node.rhs))), node.op);
      case FormulaKind::And:
        return std::all_of(node.kids.begin(), node.kids.end(), [&](int k) { return truth(k); });
      case FormulaKind::Or:
        return std::any_of(node.kids.begin(), node.kids.end(), [&](int k) { return truth(k); });
      default: return false;
    }
  }

  Status atom_status(int n, int* slot = nullptr, std::int64_t* solved = nullptr) const {
    const auto& node = ev_.nodes_[n];
    if (ground_node(n)) return truth(n) ? Status::True : Status::False;
    Linear lin;
    if (node.linear) {
      lin.constant = node.constant;
      for (auto [s, a] : node.coeffs) {
        if (known_[s]) {
          lin.constant = checked_add(lin.constant, checked_mul(a, val_[s]));
        } else if (lin.count == static_cast<int>(lin.coeffs.size())) {
          lin.opaque = true;
        } else {
          lin.coeffs[lin.count++] = {s, a};
        }
      }
    } else {
      linearize(node.lhs, 1, lin);
      linearize(node.rhs, -1, lin);
    }
    if (lin.opaque) return Status::Unknown;
    lin.count = static_cast<int>(std::remove_if(lin.coeffs.begin(), lin.coeffs.begin() + lin.count,
                                                [](auto& p) { return p.second == 0; }) -
                                 lin.coeffs.begin());
    if (lin.count == 0) return compare(lin.constant, node.op) ? Status::True : Status::False;
    if (node.op != CmpOp::Eq || lin.count != 1) return Status::Unknown;
    auto [s, a] = lin.coeffs.front();
    std::int64_t num = checked_mul(-1, lin.constant);
    if (num % a != 0) return Status::False;
    std::int64_t x = num / a;
    if (x < 0 || x > bound_) return Status::False;
    if (slot) *slot = s;
    if (solved) *solved = x;
    return Status::Solved;
  }

  bool quick_false(int n) const {
    const auto& node = ev_.nodes_[n];
    if (node.kind != FormulaKind::Cmp && ground_node(n)) return !truth(n);
    switch (node.kind) {
      case FormulaKind::Cmp: return atom_status(n) == Status::False;
      case FormulaKind::And:
        return std::any_of(node.kids.begin(), node.kids.end(), [&](int k) { return quick_false(k); });
      case FormulaKind::Or:
        return std::all_of(node.kids.begin(), node.kids.end(), [&](int k) { return quick_false(k); });
      default: return false;
    }
  }

  bool quick_true(int n) const {
    const auto& node = ev_.nodes_[n];
    if (node.kind != FormulaKind::Cmp && ground_node(n)) return truth(n);
    switch (node.kind) {
      case FormulaKind::Cmp: return atom_status(n) == Status::True;
      case FormulaKind::And:
        return std::all_of(node.kids.begin(), node.kids.end(), [&](int k) { return quick_true(k); });
      case FormulaKind::Or:
        return std::any_of(node.kids.begin(), node.kids.end(), [&](int k) { return quick_true(k); });
      default: return false;
    }
  }

  // A closed node is a sentence once the free variables are fixed; its
  // quantified slots are touched by nothing else, so it is solved on its own.
  bool closed_truth(int n) {
    const auto& node = ev_.nodes_[n];
    key_.assign(1, bound_);
    for (int f : node.free_slots) key_.push_back(val_[f]);
    auto& table = ev_.memo_[n];
    if (auto it = table.find(key_); it != table.end()) return it->second;
    auto key = key_;
    std::size_t mark = trail_.size();
    int outer = solving_;
    solving_ = n;
    bool ok = solve({n});
    solving_ = outer;
    while (trail_.size() > mark) {
      known_[trail_.back()] = 0;
      trail_.pop_back();
    }
    if (table.size() > 1'000'000) table.clear();
    table.emplace(std::move(key), ok);
    return ok;
  }

  int find(std::vector<int>& parent, int x) const {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }

  // Goals grouped so that no two groups share an unassigned variable.
  std::vector<std::vector<int>> components(const std::vector<int>& atoms, const std::vector<int>& ors) const {
    std::vector<int> goals = atoms;
    goals.insert(goals.end(), ors.begin(), ors.end());
    std::vector<int> parent(goals.size());
    for (std::size_t i = 0; i < goals.size(); ++i) parent[i] = static_cast<int>(i);
    std::vector<int> owner(val_.size(), -1);
    for (std::size_t g = 0; g < goals.size(); ++g) {
      for (int s : ev_.nodes_[goals[g]].bound_slots) {
        if (known_[s]) continue;
        if (owner[s] < 0) {
          owner[s] = static_cast<int>(g);
        } else {
          parent[find(parent, static_cast<int>(g))] = find(parent, owner[s]);
        }
      }
    }
    std::map<int, std::vector<int>> groups;
    for (std::size_t g = 0; g < goals.size(); ++g) groups[find(parent, static_cast<int>(g))].push_back(goals[g]);
    std::vector<std::vector<int>> out;
    for (auto& [root, members] : groups) out.push_back(std::move(members));
    return out;
  }

  int first_unknown(int t) const {
    const auto& c = ev_.terms_[t];
    switch (c.kind) {
      case TermKind::Var: return known_[c.slot] ? -1 : c.slot;
      case TermKind::Const: return -1;
      case TermKind::Add:
      case TermKind::Sub: {
        int s = first_unknown(c.a);
        return s >= 0 ? s : first_unknown(c.b);
      }
      case TermKind::Scale:
      case TermKind::Mod: return first_unknown(c.a);
    }
    return -1;
  }

  bool solve_inner(const std::vector<int>& goals) {
    std::vector<int> work(goals.rbegin(), goals.rend());
    std::vector<int> atoms, ors;
    for (;;) {
      bool progress = false;
      while (!work.empty()) {
        int n = work.back();
        work.pop_back();
        const auto& node = ev_.nodes_[n];
        if (node.kind != FormulaKind::Cmp && ground_node(n)) {
          if (!truth(n)) return false;
          continue;
        }
        if (node.closed && ev_.memoize_ && n != solving_) {
          if (!closed_truth(n)) return false;
          continue;
        }
        if (node.kind == FormulaKind::And) {
          work.insert(work.end(), node.kids.rbegin(), node.kids.rend());
        } else if (node.kind == FormulaKind::Or) {
          ors.push_back(n);
        } else {
          int s = -1;
          std::int64_t x = 0;
          switch (atom_status(n, &s, &x)) {
            case Status::True: break;
            case Status::False: return false;
            case Status::Solved:
              assign(s, x);
              progress = true;
              break;
            case Status::Unknown: atoms.push_back(n); break;
          }
        }
      }
      if (progress) {
        work.assign(atoms.rbegin(), atoms.rend());
        work.insert(work.begin(), ors.rbegin(), ors.rend());
        atoms.clear();
        ors.clear();
        continue;
      }
      // unit propagation over disjunctions
      std::vector<int> open;
      for (int o : ors) {
        const auto& node = ev_.nodes_[o];
        int viable = 0, last = -1;
        bool satisfied = false;
        for (int k : node.kids) {
          if (quick_true(k)) {
            satisfied = true;
            break;
          }
          if (!quick_false(k)) {
            ++viable;
            last = k;
          }
        }
        if (satisfied) continue;
        if (viable == 0) return false;
        if (viable == 1) {
          work.push_back(last);
          progress = true;
        } else {
          open.push_back(o);
        }
      }
      ors = std::move(open);
      if (!progress) break;
      work.insert(work.end(), atoms.rbegin(), atoms.rend());
      work.insert(work.begin(), ors.begin(), ors.end());
      atoms.clear();
      ors.clear();
    }

    if (ors.size() + atoms.size() > 1) {
      auto parts = components(atoms, ors);
      if (parts.size() > 1) {
        for (auto& part : parts)
          if (!solve(part)) return false;
        return true;
      }
    }

    if (!ors.empty()) {
      std::size_t best = 0, best_count = SIZE_MAX;
      for (std::size_t i = 0; i < ors.size(); ++i) {
        const auto& kids = ev_.nodes_[ors[i]].kids;
        std::size_t c = std::count_if(kids.begin(), kids.end(), [&](int k) { return !quick_false(k); });
        if (c < best_count) best_count = c, best = i;
      }
      std::vector<int> rest = atoms;
      for (std::size_t i = 0; i < ors.size(); ++i)
        if (i != best) rest.push_back(ors[i]);
      for (int k : ev_.nodes_[ors[best]].kids) {
        if (quick_false(k)) continue;
        auto branch = rest;
        branch.push_back(k);
        if (solve(branch)) return true;
      }
      return false;
    }

    if (!atoms.empty()) {
      const auto& node = ev_.nodes_[atoms.front()];
      int s = first_unknown(node.lhs);
      if (s < 0) s = first_unknown(node.rhs);
      for (std::int64_t x = 0; x <= bound_; ++x) {
        std::size_t mark = trail_.size();
        assign(s, x);
        if (solve(atoms)) return true;
        while (trail_.size() > mark) {
          known_[trail_.back()] = 0;
          trail_.pop_back();
        }
      }
      return false;
    }
    return true;
  }

  const Evaluator& ev_;
  std::int64_t bound_;
  std::vector<std::int64_t> val_;
  std::vector<char> known_;
  std::vector<int> trail_;
  std::vector<std::int64_t> key_;
  int solving_ = -1;
};

bool Evaluator::operator()(std::span<const std::int64_t> values, std::int64_t quantifier_bound) const {
  if (values.size() != free_names_.size()) throw EvalError("valuation arity mismatch");
  if (quantifier_bound < 0) throw EvalError("quantifier bound must be nonnegative");
  Search s(*this, quantifier_bound);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] < 0) throw EvalError("variable '" + free_names_[i] + "' bound to a negative value");
    s.bind(static_cast<int>(i), values[i]);
  }
  return s.solve({root_});
}

bool Evaluator::operator()(const Valuation& v, std::int64_t quantifier_bound) const {
  std::vector<std::int64_t> values;
  values.reserve(free_names_.size());
  for (auto& name : free_names_) {
    auto it = v.find(name);
    if (it == v.end()) throw EvalError("unbound free variable '" + name + "'");
    values.push_back(it->second);
  }
  return (*this)(values, quantifier_bound);
}

bool eval(const Formula& f, const Valuation& v, std::int64_t quantifier_bound) {
  return Evaluator(f)(v, quantifier_bound);
}

}  // namespace ringverify::pb
