#include "ringverify/semantics.hpp"

#include <algorithm>
#include <deque>
#include <set>

#include "ringverify/evaluator.hpp"

namespace ringverify {

std::string to_string(Mode m) {
  switch (m) {
    case Mode::Sync: return "sync";
    case Mode::SemiSync: return "semisync";
    case Mode::Async: return "async";
  }
  return "?";
}

Mode parse_mode(const std::string& s) {
  if (s == "sync") return Mode::Sync;
  if (s == "semisync") return Mode::SemiSync;
  if (s == "async") return Mode::Async;
  throw Error("unknown mode '" + s + "' (expected sync, semisync or async)");
}

AsyncState AsyncState::initial(const Configuration& c) {
  AsyncState s{c, std::vector<Phase>(c.robots(), Phase::Look), {}};
  s.stored.assign(c.robots(), placeholder_view(c.robots(), c.n));
  return s;
}

void AsyncState::canonicalize() {
  for (std::size_t i = 0; i < phases.size(); ++i)
    if (phases[i] == Phase::Look) stored[i] = placeholder_view(config.robots(), config.n);
}

std::string AsyncState::phase_string() const {
  std::string s;
  for (auto p : phases) s += p == Phase::Look ? 'L' : 'M';
  return s;
}

namespace {

void check_arity(const Protocol& phi, const Configuration& c) {
  if (phi.robots() != c.robots())
    throw Error("configuration has " + std::to_string(c.robots()) + " robots, protocol expects " +
                std::to_string(phi.robots()));
}

// Cartesian product of per-robot position choices.
std::vector<Configuration> product(std::int64_t n, const std::vector<std::vector<std::int64_t>>& choices) {
  std::set<Configuration> out;
  Configuration cur{n, std::vector<std::int64_t>(choices.size())};
  auto rec = [&](auto&& self, std::size_t i) -> void {
    if (i == choices.size()) {
      out.insert(cur);
      return;
    }
    for (auto p : choices[i]) {
      cur.positions[i] = p;
      self(self, i + 1);
    }
  };
  rec(rec, 0);
  return {out.begin(), out.end()};
}

std::vector<std::vector<std::int64_t>> move_targets(const Protocol& phi, const Configuration& c, bool allow_idle) {
  std::vector<std::vector<std::int64_t>> choices(c.robots());
  for (std::size_t i = 0; i < c.robots(); ++i) {
    auto& ch = choices[i];
    if (allow_idle) ch.push_back(c.positions[i]);
    for (int m : move_set(phi, view_clockwise(c, i))) ch.push_back(ring_mod(c.positions[i] + m, c.n));
    std::sort(ch.begin(), ch.end());
    ch.erase(std::unique(ch.begin(), ch.end()), ch.end());
  }
  return choices;
}

}  // namespace

std::vector<Configuration> post_sync(const Protocol& phi, const Configuration& c) {
  check_arity(phi, c);
  return product(c.n, move_targets(phi, c, false));
}

std::vector<Configuration> post_semisync(const Protocol& phi, const Configuration& c) {
  check_arity(phi, c);
  // union over scheduling subsets = product of (stay or move) per robot
  return product(c.n, move_targets(phi, c, true));
}

std::vector<AsyncState> post_async(const Protocol& phi, const AsyncState& s) {
  check_arity(phi, s.config);
  std::set<AsyncState> out;
  const auto k = s.config.robots();
  for (std::size_t i = 0; i < k; ++i) {
    if (s.phases[i] == Phase::Look) {
      AsyncState t = s;
      t.phases[i] = Phase::Move;
      t.stored[i] = view_clockwise(s.config, i);
      t.canonicalize();
      out.insert(std::move(t));
    } else {
      for (int m : move_set(phi, s.stored[i])) {
        AsyncState t = s;
        t.config.positions[i] = ring_mod(s.config.positions[i] + m, s.config.n);
        t.phases[i] = Phase::Look;
        t.canonicalize();
        out.insert(std::move(t));
      }
    }
  }
  return {out.begin(), out.end()};
}

std::vector<Configuration> post(const Protocol& phi, const Configuration& c, Mode mode) {
  switch (mode) {
    case Mode::Sync: return post_sync(phi, c);
    case Mode::SemiSync: return post_semisync(phi, c);
    case Mode::Async: {
      std::set<Configuration> out;
      for (auto& s : post_async(phi, AsyncState::initial(c))) out.insert(s.config);
      return {out.begin(), out.end()};
    }
  }
  return {};
}

namespace {

template <typename State, typename Next>
std::set<State> explore(const State& start, Next next, std::size_t max_states) {
  std::set<State> seen{start};
  std::deque<State> frontier{start};
  while (!frontier.empty()) {
    State s = std::move(frontier.front());
    frontier.pop_front();
    for (auto& t : next(s)) {
      if (seen.insert(t).second) {
        if (seen.size() > max_states)
          throw BudgetExceeded("state budget of " + std::to_string(max_states) + " exceeded");
        frontier.push_back(t);
      }
    }
  }
  return seen;
}

}  // namespace

std::vector<Configuration> post_star(const Protocol& phi, const Configuration& c, Mode mode, std::size_t max_states) {
  check_arity(phi, c);
  c.validate();
  if (mode == Mode::Async) {
    auto states = explore(AsyncState::initial(c), [&](const AsyncState& s) { return post_async(phi, s); }, max_states);
    std::set<Configuration> out;
    for (auto& s : states) out.insert(s.config);
    return {out.begin(), out.end()};
  }
  auto seen = explore(c, [&](const Configuration& x) { return post(phi, x, mode); }, max_states);
  return {seen.begin(), seen.end()};
}

namespace {

class PositionPredicate {
 public:
  explicit PositionPredicate(const pb::Formula& f) : eval_(f) {
    for (auto& name : eval_.free_variables()) {
      auto idx = max_robot_index({name}, true);
      index_.push_back(idx - 1);
    }
  }
  bool operator()(const Configuration& c) const {
    std::vector<std::int64_t> values(index_.size());
    for (std::size_t s = 0; s < index_.size(); ++s) {
      if (index_[s] >= c.robots()) throw Error("formula mentions a robot beyond the configuration");
      values[s] = c.positions[index_[s]];
    }
    return eval_(values, c.n);
  }

 private:
  pb::Evaluator eval_;
  std::vector<std::size_t> index_;
};

}  // namespace

bool holds_on(const pb::Formula& bad, const Configuration& c) { return PositionPredicate(bad)(c); }

bool ring_accepts(const pb::Formula& ring, std::int64_t n) {
  auto vars = pb::free_vars(ring);
  for (auto& v : vars)
    if (v != "y") throw Error("ring formula may only mention y, found '" + v + "'");
  return pb::eval(ring, {{"y", n}}, n);
}

std::optional<Witness> reachable_bad_bounded(const Protocol& phi, const pb::Formula& ring, const pb::Formula& bad,
                                             Mode mode, std::int64_t n_min, std::int64_t n_max,
                                             const ReachabilityOptions& opts) {
  PositionPredicate is_bad(bad);
  const auto k = phi.robots();
  for (std::int64_t n = std::max<std::int64_t>(n_min, static_cast<std::int64_t>(k)); n <= n_max; ++n) {
    if (!ring_accepts(ring, n)) continue;
    for (auto& start : enumerate_configurations(k, n)) {
      if (is_bad(start)) continue;
      auto reach = opts.one_step ? post(phi, start, mode) : post_star(phi, start, mode, opts.max_states);
      for (auto& q : reach)
        if (is_bad(q)) return Witness{n, start, q};
    }
  }
  return std::nullopt;
}

}  // namespace ringverify
