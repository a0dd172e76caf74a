#include "ringverify/ring.hpp"

#include <algorithm>
#include <numeric>
#include <regex>
#include <sstream>

#include "ringverify/evaluator.hpp"

namespace ringverify {

std::int64_t ring_mod(std::int64_t a, std::int64_t b) {
  if (b <= 0) throw Error("ring_mod: modulus must be positive");
  std::int64_t r = a % b;
  return r < 0 ? r + b : r;
}

void Configuration::validate() const {
  if (positions.empty()) throw Error("configuration without robots");
  if (n < static_cast<std::int64_t>(positions.size()))
    throw Error("ring size " + std::to_string(n) + " is smaller than the robot count " +
                std::to_string(positions.size()));
  for (auto p : positions)
    if (p < 0 || p >= n) throw Error("position " + std::to_string(p) + " outside [0, " + std::to_string(n - 1) + "]");
}

std::int64_t View::ring_size() const { return std::accumulate(distances.begin(), distances.end(), std::int64_t{0}); }

void View::validate() const {
  if (distances.empty()) throw Error("empty view");
  if (distances.front() == 0) throw Error("first view distance must be nonzero");
  for (auto d : distances)
    if (d < 0) throw Error("negative view distance");
}

std::string join(const std::vector<std::int64_t>& xs, const char* sep) {
  std::ostringstream os;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) os << sep;
    os << xs[i];
  }
  return os.str();
}

std::string to_string(const Configuration& c) { return "n=" + std::to_string(c.n) + "; p=" + join(c.positions); }

std::string to_string(const View& v) { return "<" + join(v.distances) + ">"; }

Configuration parse_configuration(const std::string& text) {
  static const std::regex re(R"(\s*n\s*=\s*(\d+)\s*;\s*p\s*=\s*(\d+(?:\s*,\s*\d+)*)\s*)");
  std::smatch m;
  if (!std::regex_match(text, m, re)) throw Error("malformed configuration '" + text + "' (expected n=<int>; p=<int>,...)");
  Configuration c;
  c.n = std::stoll(m[1]);
  std::string list = m[2];
  std::replace(list.begin(), list.end(), ',', ' ');
  std::istringstream is(list);
  for (std::int64_t p; is >> p;) c.positions.push_back(p);
  c.validate();
  return c;
}

View placeholder_view(std::size_t k, std::int64_t n) {
  View v{std::vector<std::int64_t>(k, 0)};
  v.distances[0] = n;
  return v;
}

View view_clockwise(const Configuration& c, std::size_t robot) {
  const std::size_t k = c.robots();
  if (robot >= k) throw Error("robot index out of range");
  // offset to every other robot in [1, n]; co-located robots sit at n
  std::vector<std::pair<std::int64_t, std::size_t>> offsets;
  offsets.reserve(k - 1);
  for (std::size_t j = 0; j < k; ++j) {
    if (j == robot) continue;
    std::int64_t d = ring_mod(c.positions[j] - c.positions[robot], c.n);
    offsets.emplace_back(d == 0 ? c.n : d, j);
  }
  std::sort(offsets.begin(), offsets.end());
  View v;
  v.distances.reserve(k);
  std::int64_t prev = 0;
  for (auto& [d, j] : offsets) {
    v.distances.push_back(d - prev);
    prev = d;
  }
  v.distances.push_back(c.n - prev);
  return v;
}

View revert(const View& v) {
  const auto& d = v.distances;
  std::size_t j = d.size();
  while (j > 0 && d[j - 1] == 0) --j;
  if (j == 0) throw Error("revert of an all-zero tuple");
  View r;
  r.distances.reserve(d.size());
  for (std::size_t l = j; l-- > 0;) r.distances.push_back(d[l]);
  for (std::size_t l = d.size(); l-- > j;) r.distances.push_back(d[l]);
  return r;
}

std::string robot_var(std::size_t i) { return "x" + std::to_string(i); }

std::size_t max_robot_index(const std::set<std::string>& vars, bool only_x) {
  static const std::regex re("x([1-9][0-9]*)");
  std::size_t k = 0;
  for (auto& v : vars) {
    std::smatch m;
    if (std::regex_match(v, m, re)) {
      k = std::max<std::size_t>(k, std::stoul(m[1]));
    } else if (only_x) {
      throw Error("unexpected variable '" + v + "' (only x1..xk are allowed)");
    }
  }
  return k;
}

Protocol::Protocol(pb::Formula body, std::size_t k) : body_(std::move(body)), k_(k) {
  if (k_ < 2) throw Error("protocols need at least two robots");
  if (!pb::is_quantifier_free(body_)) throw Error("a protocol must be quantifier free");
  auto vars = pb::free_vars(body_);
  if (max_robot_index(vars, true) > k_) throw Error("protocol mentions a robot beyond x" + std::to_string(k_));
  // bind every x1..xk so views map positionally onto evaluator slots
  std::vector<pb::Formula> padded{body_};
  for (std::size_t i = 1; i <= k_; ++i)
    if (!vars.count(robot_var(i))) padded.push_back(pb::ge(pb::var(robot_var(i)), pb::constant(0)));
  eval_ = std::make_shared<const pb::Evaluator>(pb::conj(std::move(padded)));
}

Protocol Protocol::from_formula(pb::Formula body, std::optional<std::size_t> declared_k) {
  std::size_t k = max_robot_index(pb::free_vars(body), true);
  if (declared_k) {
    if (*declared_k < k) throw Error("declared robot count is smaller than the largest x-index");
    k = *declared_k;
  }
  return Protocol(std::move(body), k);
}

bool Protocol::holds(const View& v) const {
  if (v.size() != k_) throw Error("view arity " + std::to_string(v.size()) + " does not match protocol arity " + std::to_string(k_));
  // slots are x1..xk in lexicographic order of the names
  const auto& names = eval_->free_variables();
  std::vector<std::int64_t> values(names.size());
  for (std::size_t s = 0; s < names.size(); ++s) values[s] = v.distances[std::stoul(names[s].substr(1)) - 1];
  return (*eval_)(values, 0);
}

MoveSet move_set(const Protocol& phi, const View& v) {
  View r = revert(v);
  bool sym = r == v;
  bool cw = phi.holds(v);
  bool acw = !sym && phi.holds(r);
  // an invalid protocol can order both directions; keep both
  if (sym && cw) return {-1, 1};
  if (cw && acw) return {-1, 1};
  if (cw) return {1};
  if (acw) return {-1};
  return {0};
}

std::vector<View> enumerate_views(std::size_t k, std::int64_t n) {
  std::vector<View> out;
  if (k == 0 || n < 1) return out;
  std::vector<std::int64_t> cur(k, 0);
  // compositions of n into k parts, first part >= 1, lexicographic
  auto rec = [&](auto&& self, std::size_t idx, std::int64_t remaining) -> void {
    if (idx == k - 1) {
      cur[idx] = remaining;
      if (idx != 0 || remaining >= 1) out.push_back(View{cur});
      return;
    }
    for (std::int64_t d = idx == 0 ? 1 : 0; d <= remaining; ++d) {
      cur[idx] = d;
      self(self, idx + 1, remaining - d);
    }
  };
  rec(rec, 0, n);
  return out;
}

std::vector<Configuration> enumerate_configurations(std::size_t k, std::int64_t n) {
  std::vector<Configuration> out;
  Configuration c{n, std::vector<std::int64_t>(k, 0)};
  for (;;) {
    out.push_back(c);
    std::size_t i = k;
    while (i > 0) {
      --i;
      if (++c.positions[i] < n) break;
      c.positions[i] = 0;
      if (i == 0) return out;
    }
    if (k == 0) return out;
  }
}

std::optional<View> protocol_valid_bounded(const Protocol& phi, std::int64_t n_max) {
  const auto k = phi.robots();
  for (std::int64_t n = static_cast<std::int64_t>(k); n <= n_max; ++n) {
    for (auto& v : enumerate_views(k, n)) {
      if (!phi.holds(v)) continue;
      View r = revert(v);
      if (r != v && phi.holds(r)) return v;
    }
  }
  return std::nullopt;
}

}  // namespace ringverify
