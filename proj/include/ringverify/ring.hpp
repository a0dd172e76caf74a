// Ring-world objects: configurations, views, the reverted view and the
// move decision of a protocol.
#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ringverify/presburger.hpp"

namespace ringverify {

namespace pb {
class Evaluator;
}

/// Nonnegative remainder: the unique d in [0, b-1] with a = b*j + d.
std::int64_t ring_mod(std::int64_t a, std::int64_t b);

/// Robot positions on a ring of `n` nodes numbered clockwise. Robot indices
/// are 0-based in this API; formula variables are 1-based (x1, p1, ...).
struct Configuration {
  std::int64_t n = 0;
  std::vector<std::int64_t> positions;

  std::size_t robots() const { return positions.size(); }
  /// Throws Error unless n >= k >= 1 and every position lies in [0, n-1].
  void validate() const;

  auto operator<=>(const Configuration&) const = default;
  bool operator==(const Configuration&) const = default;
};

/// Distances to the successive occupied nodes, clockwise; sums to n and the
/// first entry is nonzero. Zeros denote towers.
struct View {
  std::vector<std::int64_t> distances;

  std::size_t size() const { return distances.size(); }
  std::int64_t ring_size() const;
  /// Throws Error when the entries do not form a view.
  void validate() const;

  auto operator<=>(const View&) const = default;
  bool operator==(const View&) const = default;
};

/// `n=<int>; p=<int>,<int>,...`
std::string to_string(const Configuration& c);
Configuration parse_configuration(const std::string& text);
/// `<d1,d2,...>`
std::string to_string(const View& v);
std::string join(const std::vector<std::int64_t>& xs, const char* sep = ",");

/// The view <n, 0, ..., 0> seen by robots all standing on one node.
View placeholder_view(std::size_t k, std::int64_t n);

View view_clockwise(const Configuration& c, std::size_t robot);
View revert(const View& v);

/// A protocol: quantifier-free formula over x1..xk deciding clockwise moves.
class Protocol {
 public:
  /// Free variables must be among x1..xk. k < 2 is rejected.
  Protocol(pb::Formula body, std::size_t k);

  /// k inferred from the largest x-index; `declared_k` overrides when given.
  static Protocol from_formula(pb::Formula body, std::optional<std::size_t> declared_k = std::nullopt);

  std::size_t robots() const { return k_; }
  const pb::Formula& body() const { return body_; }
  bool holds(const View& v) const;

 private:
  pb::Formula body_;
  std::size_t k_;
  std::shared_ptr<const pb::Evaluator> eval_;
};

/// Largest i such that x<i> occurs in `vars`, 0 if none. Throws on other names
/// when `only_x` is set.
std::size_t max_robot_index(const std::set<std::string>& vars, bool only_x);

/// Variable name x<i> (1-based).
std::string robot_var(std::size_t i);

/// Subset of {-1, 0, +1}, ascending.
using MoveSet = std::vector<int>;

MoveSet move_set(const Protocol& phi, const View& v);

/// All views of k robots on a ring of size n, lexicographic order.
std::vector<View> enumerate_views(std::size_t k, std::int64_t n);

/// All (k, n)-configurations, lexicographic order.
std::vector<Configuration> enumerate_configurations(std::size_t k, std::int64_t n);

/// First view V (n ascending, then lexicographic) with V |= phi, rev(V) |= phi
/// and V != rev(V), for n in [k, n_max]. Empty when none exists.
std::optional<View> protocol_valid_bounded(const Protocol& phi, std::int64_t n_max);

}  // namespace ringverify
