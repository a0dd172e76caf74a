#include <doctest.h>

#include <deque>
#include <set>

#include "ringverify/semantics.hpp"
#include "support/fixtures.hpp"

using namespace ringverify;

namespace {

using Configs = std::vector<Configuration>;

Configs cfgs(std::int64_t n, std::vector<std::vector<std::int64_t>> ps) {
  Configs out;
  for (auto& p : ps) out.push_back({n, p});
  std::sort(out.begin(), out.end());
  return out;
}

// Successors by explicit enumeration of scheduled subsets and per-robot
// choices, independent of the library's product construction.
Configs reference_post(const Protocol& phi, const Configuration& c, bool semi) {
  const auto k = c.robots();
  std::set<Configuration> out;
  for (std::size_t mask = 0; mask < (std::size_t{1} << k); ++mask) {
    if (!semi && mask != (std::size_t{1} << k) - 1) continue;
    std::vector<std::vector<std::int64_t>> choice(k);
    for (std::size_t i = 0; i < k; ++i) {
      if (!(mask >> i & 1)) {
        choice[i] = {c.positions[i]};
        continue;
      }
      for (int m : move_set(phi, view_clockwise(c, i))) choice[i].push_back(((c.positions[i] + m) % c.n + c.n) % c.n);
    }
    std::vector<std::size_t> idx(k, 0);
    for (;;) {
      Configuration d = c;
      for (std::size_t i = 0; i < k; ++i) d.positions[i] = choice[i][idx[i]];
      out.insert(d);
      std::size_t i = 0;
      while (i < k && ++idx[i] == choice[i].size()) idx[i++] = 0;
      if (i == k) break;
    }
  }
  return {out.begin(), out.end()};
}

template <typename State, typename Next>
std::set<State> closure(const State& s, Next next) {
  std::set<State> seen{s};
  std::deque<State> todo{s};
  while (!todo.empty()) {
    auto cur = todo.front();
    todo.pop_front();
    for (auto& t : next(cur))
      if (seen.insert(t).second) todo.push_back(t);
  }
  return seen;
}

}  // namespace

TEST_SUITE("semantics") {
  TEST_CASE("synchronous successors") {
    auto gt = fixtures::protocol("x1 > x2", 2);
    CHECK(post_sync(gt, {5, {0, 1}}) == cfgs(5, {{4, 2}}));
    auto never = fixtures::protocol("1 < 1", 3);
    Configuration c{6, {0, 0, 4}};
    CHECK(post_sync(never, c) == Configs{c});
    auto eq = fixtures::protocol("x1 = x2", 2);
    CHECK(post_sync(eq, {4, {0, 2}}) == cfgs(4, {{3, 1}, {3, 3}, {1, 1}, {1, 3}}));
  }

  TEST_CASE("semi-synchronous successors") {
    auto gt = fixtures::protocol("x1 > x2", 2);
    CHECK(post_semisync(gt, {5, {0, 1}}) == cfgs(5, {{0, 1}, {4, 1}, {0, 2}, {4, 2}}));
    auto never = fixtures::protocol("1 < 1", 2);
    CHECK(post_semisync(never, {4, {1, 3}}) == cfgs(4, {{1, 3}}));
  }

  TEST_CASE("property: successors match subset enumeration, sync within semisync") {
    for (auto& [name, phi] : fixtures::suite()) {
      const auto k = phi.robots();
      for (std::int64_t n = static_cast<std::int64_t>(k); n <= 6; ++n)
        for (auto& c : enumerate_configurations(k, n)) {
          auto s = post_sync(phi, c);
          auto ss = post_semisync(phi, c);
          INFO(name, " ", to_string(c));
          CHECK(s == reference_post(phi, c, false));
          CHECK(ss == reference_post(phi, c, true));
          CHECK(std::includes(ss.begin(), ss.end(), s.begin(), s.end()));
          CHECK(post(phi, c, Mode::Sync) == s);
        }
    }
  }

  TEST_CASE("asynchronous look steps") {
    auto never = fixtures::protocol("1 < 1", 3);
    Configuration c{6, {0, 2, 3}};
    auto succ = post_async(never, AsyncState::initial(c));
    REQUIRE(succ.size() == 3);
    for (auto& s : succ) {
      CHECK(s.config == c);
      std::size_t movers = 0;
      for (std::size_t i = 0; i < 3; ++i) {
        if (s.phases[i] == Phase::Move) {
          ++movers;
          CHECK(s.stored[i] == view_clockwise(c, i));
        } else {
          CHECK(s.stored[i] == placeholder_view(3, 6));
        }
      }
      CHECK(movers == 1);
    }
  }

  TEST_CASE("asynchronous move step uses the stored view") {
    auto gt = fixtures::protocol("x1 > x2", 2);
    AsyncState s = AsyncState::initial({5, {0, 1}});
    s.phases[0] = Phase::Move;
    s.stored[0] = View{{4, 1}};
    auto succ = post_async(gt, s);
    AsyncState moved = AsyncState::initial({5, {1, 1}});
    CHECK(std::find(succ.begin(), succ.end(), moved) != succ.end());
  }

  TEST_CASE("stale view drives the eventual move") {
    auto gt = fixtures::protocol("x1 > x2", 2);
    AsyncState s = AsyncState::initial({5, {0, 1}});
    // robot 1 looks and stores <1,4>, so it will step anticlockwise
    auto pick = [&](const std::vector<AsyncState>& next, auto pred) {
      auto it = std::find_if(next.begin(), next.end(), pred);
      REQUIRE(it != next.end());
      return *it;
    };
    s = pick(post_async(gt, s), [](const AsyncState& t) { return t.phases[0] == Phase::Move; });
    CHECK(s.stored[0] == View{{1, 4}});
    // robot 2 completes a full cycle: it sees <4,1> and steps clockwise to 2
    s = pick(post_async(gt, s), [](const AsyncState& t) { return t.phases[1] == Phase::Move; });
    s = pick(post_async(gt, s), [](const AsyncState& t) { return t.phases[1] == Phase::Look; });
    CHECK(s.config.positions == std::vector<std::int64_t>{0, 2});
    // the current view of robot 1 is now <2,3>, but the stored <1,4> decides
    CHECK(view_clockwise(s.config, 0) == View{{2, 3}});
    auto next = post_async(gt, s);
    s = pick(next, [](const AsyncState& t) { return t.phases[0] == Phase::Look; });
    CHECK(s.config.positions == std::vector<std::int64_t>{4, 2});
  }

  TEST_CASE("reachable sets") {
    auto never = fixtures::protocol("1 < 1", 3);
    Configuration c{5, {0, 1, 1}};
    for (auto m : {Mode::Sync, Mode::SemiSync, Mode::Async}) CHECK(post_star(never, c, m) == Configs{c});
    auto gt = fixtures::protocol("x1 > x2", 2);
    CHECK(post_star(gt, {4, {0, 1}}, Mode::Sync) == cfgs(4, {{0, 1}, {3, 2}}));
    CHECK(post_sync(gt, {4, {3, 2}}) == cfgs(4, {{0, 1}}));
  }

  TEST_CASE("property: reachable sets match a reference closure and are nested") {
    for (auto& [name, phi] : fixtures::suite()) {
      if (phi.robots() != 2) continue;
      for (std::int64_t n = 2; n <= 5; ++n)
        for (auto& c : enumerate_configurations(2, n)) {
          auto s = post_star(phi, c, Mode::Sync);
          auto ss = post_star(phi, c, Mode::SemiSync);
          auto as = post_star(phi, c, Mode::Async);
          auto ref = closure(c, [&](const Configuration& x) { return reference_post(phi, x, false); });
          INFO(name, " ", to_string(c));
          CHECK(Configs(ref.begin(), ref.end()) == s);
          CHECK(std::includes(ss.begin(), ss.end(), s.begin(), s.end()));
          CHECK(std::includes(as.begin(), as.end(), ss.begin(), ss.end()));
        }
    }
  }

  TEST_CASE("budget is enforced") {
    auto gt = fixtures::protocol("x1 > x2", 2);
    CHECK_THROWS_AS(post_star(gt, {5, {0, 1}}, Mode::Async, 3), BudgetExceeded);
  }

  TEST_CASE("bounded safety search") {
    auto never = fixtures::protocol("1 < 1", 3);
    auto ring = pb::parse_formula("y > 6");
    CHECK_FALSE(reachable_bad_bounded(never, ring, fixtures::collision(3), Mode::Sync, 7, 9));

    auto gap1 = fixtures::protocol("x1 = 1", 2);
    auto w = reachable_bad_bounded(gap1, pb::truth(), pb::parse_formula("x1 = x2"), Mode::SemiSync, 2, 5);
    REQUIRE(w);
    // both robots see <1,1>; scheduling both can swap them or merge them
    CHECK(w->n == 2);
    CHECK(w->start.positions == std::vector<std::int64_t>{0, 1});
    CHECK(w->successor.positions == std::vector<std::int64_t>{0, 0});
    ReachabilityOptions one;
    one.one_step = true;
    auto w4 = reachable_bad_bounded(gap1, pb::truth(), pb::parse_formula("x1 = x2"), Mode::SemiSync, 4, 5, one);
    REQUIRE(w4);
    CHECK(w4->n == 4);
    CHECK(w4->start.positions == std::vector<std::int64_t>{0, 1});
    // robot 1 steps onto robot 2, or robot 2 steps back onto robot 1
    CHECK(post_semisync(gap1, w4->start) == cfgs(4, {{0, 0}, {0, 1}, {1, 0}, {1, 1}}));
    CHECK(w4->successor.positions == std::vector<std::int64_t>{0, 0});

    auto gt = fixtures::protocol("x1 > x2", 2);
    for (auto m : {Mode::Sync, Mode::SemiSync, Mode::Async})
      CHECK_FALSE(reachable_bad_bounded(gt, pb::truth(), fixtures::collision(2), m, 4, 7));
    // on three nodes the two robots step onto the same node at once
    auto w3 = reachable_bad_bounded(gt, pb::truth(), fixtures::collision(2), Mode::Sync, 3, 7);
    REQUIRE(w3);
    CHECK(w3->n == 3);
    CHECK(w3->start.positions == std::vector<std::int64_t>{0, 1});
    CHECK(post_sync(gt, w3->start) == cfgs(3, {{2, 2}}));
    // the search reports the smallest bad configuration in the closure
    CHECK(w3->successor.positions == std::vector<std::int64_t>{0, 0});
  }

  TEST_CASE("ring and bad predicates") {
    CHECK(ring_accepts(pb::parse_formula("y > 6"), 7));
    CHECK_FALSE(ring_accepts(pb::parse_formula("y > 6"), 6));
    CHECK_THROWS_AS(ring_accepts(pb::parse_formula("x1 > 6"), 7), Error);
    CHECK(holds_on(fixtures::collision(3), {5, {1, 2, 1}}));
    CHECK_FALSE(holds_on(fixtures::collision(3), {5, {1, 2, 3}}));
  }

  TEST_CASE("modes") {
    CHECK(parse_mode("semisync") == Mode::SemiSync);
    CHECK(to_string(Mode::Async) == "async");
    CHECK_THROWS_AS(parse_mode("fsync"), Error);
  }

  TEST_CASE("oracle output is deterministic") {
    auto eq = fixtures::protocol("x1 = x2", 2);
    Configuration c{6, {0, 3}};
    CHECK(post_star(eq, c, Mode::Async) == post_star(eq, c, Mode::Async));
    auto ss = post_semisync(eq, c);
    CHECK(std::is_sorted(ss.begin(), ss.end()));
  }
}
