// Existential Presburger encodings of views, moves and one-step successor
// relations, and the verification queries built from them.
#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ringverify/presburger.hpp"
#include "ringverify/ring.hpp"
#include "ringverify/semantics.hpp"

namespace ringverify::enc {

// Variable naming. Indices are 1-based; primed variables carry `_next`.
std::string ring_var();                                  // y
std::string position_var(std::size_t i);                 // p<i>
std::string next_position_var(std::size_t i);            // p<i>_next
std::string view_var(std::size_t i);                     // d<i>
std::string reverted_view_var(std::size_t i);            // dr<i>
std::string phase_var(std::size_t i, bool next = false); // s<i>, s<i>_next
std::string stored_view_var(std::size_t robot, std::size_t l, bool next = false);  // v<i>_<l>[_next]

/// Source of bound names `_b<counter>`; outside the DSL identifier space.
class FreshNames {
 public:
  std::string next() { return "_b" + std::to_string(counter_++); }
  std::vector<std::string> next(std::size_t count);

 private:
  std::size_t counter_ = 0;
};

/// Deliberate encoding bugs, used to check that cross-checking notices them.
enum class Fault { None, WraparoundOffByOne };

struct Options {
  Fault fault = Fault::None;
};

// Term-level builders. `p` holds one term per robot; `i` is 1-based.
pb::Formula config_view(FreshNames& fresh, std::size_t i, const pb::Term& y, const std::vector<pb::Term>& p,
                        const std::vector<pb::Term>& d);
pb::Formula view_sym(const std::vector<pb::Term>& d, const std::vector<pb::Term>& dr);
/// Move decided from an arbitrary (possibly stale) view `v` of robot at `pi`.
pb::Formula move_from_view(FreshNames& fresh, const Protocol& phi, const pb::Term& y, const pb::Term& pi,
                           const std::vector<pb::Term>& v, const pb::Term& target, const Options& opts = {});
pb::Formula move(FreshNames& fresh, const Protocol& phi, std::size_t i, const pb::Term& y,
                 const std::vector<pb::Term>& p, const pb::Term& target, const Options& opts = {});

/// phi(x1..xk) with x_l replaced by terms[l-1].
pb::Formula instantiate(const Protocol& phi, const std::vector<pb::Term>& terms);
/// f(x1..xk) with x_l replaced by terms[l-1]; for Bad and friends.
pb::Formula instantiate(const pb::Formula& f, const std::vector<pb::Term>& terms);

// Formulae over the conventional variable names.

/// Over {y, p1..pk, d1..dk}: d is the clockwise view of robot i.
pb::Formula config_view_formula(std::size_t i, std::size_t k);
/// Over {d1..dk, dr1..drk}: dr = revert(d).
pb::Formula view_sym_formula(std::size_t k);
/// Over {y, p1..pk, `target`}.
pb::Formula move_formula(const Protocol& phi, std::size_t i, const std::string& target = "p_next",
                         const Options& opts = {});
/// Over {y, p1..pk, p1_next..pk_next}; SemiSync requires a nonempty scheduled set.
pb::Formula post_formula(const Protocol& phi, Mode mode, const Options& opts = {});
/// Over {y, p, s, v, p_next, s_next, v_next} on canonical asynchronous states.
pb::Formula async_post_formula(const Protocol& phi, const Options& opts = {});

/// Offsets matched to robots and robots to offsets, without a bijection.
/// Accepts wrong views once towers appear with k >= 4; kept for tests.
pb::Formula config_view_formula_unindexed(std::size_t i, std::size_t k);

// Queries.

enum class Purpose { Safety, Validity, UniqSeq };
enum class Role { RingSize, Position, ViewDistance, Phase, StoredView };

std::string to_string(Purpose p);

struct VarRole {
  Role role;
  std::size_t index = 0;  // 1-based robot or distance index
  bool primed = false;    // successor positions, reverted view distances
};

struct VerificationQuery {
  Purpose purpose;
  std::size_t k = 0;
  /// Typing constraints (y >= k, positions in [0, y-1], view shape).
  pb::Formula domain;
  /// Complete assertion, domain included.
  pb::Formula body;
  /// Free variables of `body` in declaration order.
  std::vector<std::string> variables;
  std::map<std::string, VarRole> roles;

  std::optional<Protocol> protocol;
  pb::Formula ring;
  pb::Formula bad;
  Mode mode = Mode::Sync;
};

/// Checks the variable conventions for Ring (only y) and Bad (x1..xk).
void check_conventions(std::size_t k, const pb::Formula& ring, const pb::Formula& bad);

/// Satisfiable iff some good configuration on an accepted ring has a bad
/// one-step successor. `mode` must be Sync or SemiSync.
VerificationQuery safety_query(const Protocol& phi, const pb::Formula& ring, const pb::Formula& bad, Mode mode,
                               const Options& opts = {});
/// Satisfiable iff two distinct robots both move from one configuration.
VerificationQuery uniqseq_query(const Protocol& phi, const Options& opts = {});
/// Satisfiable iff some view V != rev(V) has V |= phi and rev(V) |= phi.
VerificationQuery validity_query(const Protocol& phi);

}  // namespace ringverify::enc
