// Shared test inputs: the committed protocol suite, bad-configuration
// formulae and a generator of random well-formed protocols.
#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "ringverify/commands.hpp"

#ifndef RINGVERIFY_SOURCE_DIR
#error "RINGVERIFY_SOURCE_DIR must point at the repository root"
#endif

namespace fixtures {

using namespace ringverify;

inline std::filesystem::path source_dir() { return RINGVERIFY_SOURCE_DIR; }
inline std::filesystem::path protocol_path(const std::string& rel) { return source_dir() / "protocols" / rel; }

struct NamedProtocol {
  std::string name;
  Protocol phi;
};

/// protocols/suite/*.pb, sorted by file name.
inline std::vector<NamedProtocol> suite() {
  std::vector<std::filesystem::path> files;
  for (auto& e : std::filesystem::directory_iterator(protocol_path("suite")))
    if (e.path().extension() == ".pb") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<NamedProtocol> out;
  for (auto& f : files) out.push_back({f.stem().string(), cli::load_protocol(f.string())});
  return out;
}

inline Protocol protocol(const std::string& text, std::size_t k) { return Protocol(pb::parse_formula(text), k); }

/// Some pair of robots shares a node.
inline pb::Formula collision(std::size_t k) {
  std::vector<pb::Formula> parts;
  for (std::size_t i = 1; i <= k; ++i)
    for (std::size_t j = i + 1; j <= k; ++j) parts.push_back(pb::eq(pb::var(robot_var(i)), pb::var(robot_var(j))));
  return pb::disj(parts);
}

/// A few position predicates of different shapes, all over x1..xk.
inline std::vector<pb::Formula> bads(std::size_t k) {
  std::vector<pb::Formula> out{collision(k), pb::parse_formula("x1 = x2"), pb::parse_formula("x1 = 0 and x2 = 1"),
                               pb::parse_formula("x2 = x1 + 1 or x1 = x2 + 1")};
  if (k >= 3) out.push_back(pb::parse_formula("x1 = x3 and x2 mod 2 = 0"));
  return out;
}

/// Reversal of the view variables as a formula transformer: psi evaluated on
/// rev(x), written as a case split on the last nonzero distance.
inline pb::Formula on_reverted(const pb::Formula& psi, std::size_t k) {
  std::vector<pb::Formula> cases;
  for (std::size_t j = 1; j <= k; ++j) {
    std::vector<pb::Formula> parts{pb::ge(pb::var(robot_var(j)), pb::constant(1))};
    for (std::size_t l = j + 1; l <= k; ++l) parts.push_back(pb::eq(pb::var(robot_var(l)), pb::constant(0)));
    // rev(d) = <d_j, ..., d_1, d_k, ..., d_{j+1}>
    std::map<std::string, pb::Term> m;
    for (std::size_t l = 1; l <= k; ++l) {
      std::size_t src = l <= j ? j + 1 - l : k + j + 1 - l;
      m[robot_var(l)] = pb::var(robot_var(src));
    }
    parts.push_back(pb::substitute(psi, m));
    cases.push_back(pb::conj(parts));
  }
  return pb::disj(cases);
}

/// rev(x) = x.
inline pb::Formula symmetric(std::size_t k) {
  std::vector<pb::Formula> cases;
  for (std::size_t j = 1; j <= k; ++j) {
    std::vector<pb::Formula> parts{pb::ge(pb::var(robot_var(j)), pb::constant(1))};
    for (std::size_t l = j + 1; l <= k; ++l) parts.push_back(pb::eq(pb::var(robot_var(l)), pb::constant(0)));
    for (std::size_t l = 1; l <= k; ++l) {
      std::size_t src = l <= j ? j + 1 - l : k + j + 1 - l;
      if (src != l) parts.push_back(pb::eq(pb::var(robot_var(l)), pb::var(robot_var(src))));
    }
    cases.push_back(pb::conj(parts));
  }
  return pb::disj(cases);
}

class RandomProtocols {
 public:
  explicit RandomProtocols(std::uint64_t seed) : rng_(seed) {}

  /// Random quantifier-free formula over x1..xk with constants in [0, 7].
  pb::Formula formula(std::size_t k, int depth) {
    if (depth == 0 || pick(0, 2) == 0) return atom(k);
    std::vector<pb::Formula> kids;
    int arity = static_cast<int>(pick(2, 3));
    for (int i = 0; i < arity; ++i) kids.push_back(formula(k, depth - 1));
    switch (pick(0, 2)) {
      case 0: return pb::conj(kids);
      case 1: return pb::disj(kids);
      default: return pb::negate(kids.front());
    }
  }

  /// (psi and not psi(rev x)) or (psi and x = rev x): a view and its distinct
  /// reversal never both satisfy it, whatever psi is.
  Protocol valid(std::size_t k) {
    auto psi = formula(k, 2);
    auto body = pb::disj({pb::conj({psi, pb::negate(on_reverted(psi, k))}), pb::conj({psi, symmetric(k)})});
    return Protocol(body, k);
  }

 private:
  std::int64_t pick(std::int64_t lo, std::int64_t hi) { return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng_); }

  pb::Term x(std::size_t k) { return pb::var(robot_var(static_cast<std::size_t>(pick(1, static_cast<std::int64_t>(k))))); }

  pb::Formula atom(std::size_t k) {
    static const pb::CmpOp ops[] = {pb::CmpOp::Eq, pb::CmpOp::Le, pb::CmpOp::Ge,
                                    pb::CmpOp::Lt, pb::CmpOp::Gt, pb::CmpOp::Ne};
    auto op = ops[pick(0, 5)];
    switch (pick(0, 3)) {
      case 0: return pb::cmp(x(k), op, pb::constant(pick(0, 7)));
      case 1: return pb::cmp(x(k), op, x(k));
      case 2: return pb::cmp(pb::add(x(k), x(k)), op, pb::constant(pick(0, 7)));
      default: {
        auto m = pick(2, 3);
        return pb::eq(pb::mod(x(k), m), pb::constant(pick(0, m - 1)));
      }
    }
  }

  std::mt19937_64 rng_;
};

}  // namespace fixtures
