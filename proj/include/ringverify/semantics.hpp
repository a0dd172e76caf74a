// Explicit-state transition relations for synchronous, semi-synchronous and
// asynchronous scheduling, and bounded reachability over them.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ringverify/ring.hpp"

namespace ringverify {

enum class Mode { Sync, SemiSync, Async };

std::string to_string(Mode m);
Mode parse_mode(const std::string& s);

enum class Phase : std::uint8_t { Look = 0, Move = 1 };

/// Asynchronous state. Robots in LOOK keep the placeholder view; their stored
/// view is never read before being overwritten.
struct AsyncState {
  Configuration config;
  std::vector<Phase> phases;
  std::vector<View> stored;

  /// All robots ready to look.
  static AsyncState initial(const Configuration& c);
  void canonicalize();
  /// `L`/`M` per robot.
  std::string phase_string() const;

  auto operator<=>(const AsyncState&) const = default;
  bool operator==(const AsyncState&) const = default;
};

class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

inline constexpr std::size_t kDefaultMaxStates = 2'000'000;

/// Witness of a safety violation: `start` is good, `successor` is bad and
/// reachable from `start` at ring size n.
struct Witness {
  std::int64_t n = 0;
  Configuration start;
  Configuration successor;

  bool operator==(const Witness&) const = default;
};

// Successor sets are sorted and duplicate free.
std::vector<Configuration> post_sync(const Protocol& phi, const Configuration& c);
/// Includes `c` itself (the empty scheduling subset).
std::vector<Configuration> post_semisync(const Protocol& phi, const Configuration& c);
std::vector<AsyncState> post_async(const Protocol& phi, const AsyncState& s);
std::vector<Configuration> post(const Protocol& phi, const Configuration& c, Mode mode);

/// Reflexive-transitive closure. For ASYNC, the positions reachable from the
/// all-LOOK state. Throws BudgetExceeded past `max_states` explored states.
std::vector<Configuration> post_star(const Protocol& phi, const Configuration& c, Mode mode,
                                     std::size_t max_states = kDefaultMaxStates);

struct ReachabilityOptions {
  std::size_t max_states = kDefaultMaxStates;
  /// Only consider direct successors instead of the full closure.
  bool one_step = false;
};

/// Brute-force safety check over every ring size in [n_min, n_max] accepted
/// by `ring` (free variable y). Scans n ascending, then good start
/// configurations lexicographically; returns the smallest bad configuration
/// reachable from the first start that reaches one.
std::optional<Witness> reachable_bad_bounded(const Protocol& phi, const pb::Formula& ring, const pb::Formula& bad,
                                             Mode mode, std::int64_t n_min, std::int64_t n_max,
                                             const ReachabilityOptions& opts = {});

/// Bad(x1..xk) evaluated on a configuration.
bool holds_on(const pb::Formula& bad, const Configuration& c);
/// Ring(y) evaluated at y = n.
bool ring_accepts(const pb::Formula& ring, std::int64_t n);

}  // namespace ringverify
