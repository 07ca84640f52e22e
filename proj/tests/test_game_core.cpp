#include <doctest.h>

#include <cmath>

#include "test_support.hpp"
#include "zsg/game.hpp"

using namespace zsg;
using zsg::testing::Rng;

namespace {

MarkovGame two_state_chain(double p_leave, bool absorbing_b = true, double discount = 1.0) {
  StateSpace space;
  space.names = {"A", "B"};
  space.absorbing = {0, static_cast<std::uint8_t>(absorbing_b ? 1 : 0)};
  MarkovGame game = MarkovGame::create(std::move(space), {-1.0, 1.0, 2}, {-1.0, 1.0, 2});
  game.kernel.set_row_all_controls(0, {{1, p_leave}, {0, 1.0 - p_leave}});
  if (!absorbing_b) game.kernel.set_row_all_controls(1, {{1, 1.0}});
  game.discount.assign(2, discount);
  return game;
}

}  // namespace

TEST_CASE("control grid points") {
  const ControlGrid g{-1.0, 1.0, 5};
  CHECK(g.points() == std::vector<double>{-1.0, -0.5, 0.0, 0.5, 1.0});
  CHECK(g.point(0) == -1.0);
  CHECK(g.point(4) == 1.0);
  // endpoints are exact and interior points strictly increase for any count
  for (int n : {2, 3, 7, 11}) {
    const ControlGrid grid{-1.0, 1.0, n};
    CHECK(grid.point(0) == -1.0);
    CHECK(grid.point(n - 1) == 1.0);
    for (int k = 1; k < n; ++k) CHECK(grid.point(k) > grid.point(k - 1));
  }
  const ControlGrid single{2.5, 2.5, 1};
  CHECK(single.point(0) == 2.5);
  const ControlGrid collapsed{0.25, 0.75, 1};  // single point collapses to lo
  CHECK(collapsed.point(0) == 0.25);
}

TEST_CASE("validate_game") {
  SUBCASE("well-formed two-state game has an empty report") {
    const MarkovGame game = two_state_chain(0.5);
    CHECK(validate_game(game).empty());
  }
  SUBCASE("a kernel row summing to 0.9 is reported with its indices") {
    MarkovGame game = two_state_chain(0.5);
    game.kernel.set_row(0, 1, 0, {{1, 0.9}});
    const auto report = validate_game(game);
    REQUIRE(!report.empty());
    bool found = false;
    for (const auto& v : report)
      if (v.state == 0 && v.r1 == 1 && v.r2 == 0 && v.what.find("sums to 0.9") != std::string::npos)
        found = true;
    CHECK(found);
  }
  SUBCASE("undiscounted game with no absorbing states") {
    const MarkovGame game = two_state_chain(0.5, /*absorbing_b=*/false, /*discount=*/1.0);
    const auto report = validate_game(game);
    REQUIRE(!report.empty());
    bool found = false;
    for (const auto& v : report)
      if (v.what.find("no absorbing states and no discount") != std::string::npos) found = true;
    CHECK(found);
    // discounting the same game clears the report
    MarkovGame discounted = two_state_chain(0.5, false, 0.9);
    CHECK(validate_game(discounted).empty());
  }
  SUBCASE("absorbing state that is not a self-loop") {
    MarkovGame game = two_state_chain(0.5);
    game.kernel.set_row(1, 0, 0, {{0, 1.0}});
    const auto report = validate_game(game);
    bool found = false;
    for (const auto& v : report)
      if (v.state == 1 && v.what.find("self-loop") != std::string::npos) found = true;
    CHECK(found);
  }
  SUBCASE("discount outside (0,1]") {
    MarkovGame game = two_state_chain(0.5);
    game.discount[0] = 1.5;
    bool found = false;
    for (const auto& v : validate_game(game))
      if (v.state == 0 && v.what.find("discount") != std::string::npos) found = true;
    CHECK(found);
  }
  SUBCASE("declared separable structure is checked by cross differences") {
    MarkovGame game = two_state_chain(0.5);
    game.structure.kind = StructureKind::Separable;
    game.costs.run(0, 0, 0) = 1.0;  // c = u(i) + v(j) with u = (1,0), v = (0,-1)
    game.costs.run(0, 0, 1) = 0.0;
    game.costs.run(0, 1, 0) = 0.0;
    game.costs.run(0, 1, 1) = -1.0;
    CHECK(validate_game(game).empty());
    game.costs.run(0, 1, 1) = 2.0;  // breaks additivity
    bool found = false;
    for (const auto& v : validate_game(game))
      if (v.what.find("not separable") != std::string::npos) found = true;
    CHECK(found);
  }
}

TEST_CASE("probe_convex_concave") {
  const ControlGrid g{-1.0, 1.0, 5};
  auto table = [&](auto f) {
    std::vector<double> t;
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) t.push_back(f(g.point(i), g.point(j)));
    return t;
  };

  SUBCASE("r1^2 - r2^2 is convex-concave with strictly negative defect") {
    const auto rep = probe_convex_concave(table([](double a, double b) { return a * a - b * b; }), 5, 5);
    CHECK(rep.convex_in_r1);
    CHECK(rep.concave_in_r2);
    CHECK(rep.worst_violation <= 0.0);
  }
  SUBCASE("-r1^2 fails convexity with defect (hi-lo)^2/16 at the midpoints") {
    const auto rep = probe_convex_concave(table([](double a, double) { return -a * a; }), 5, 5);
    CHECK(!rep.convex_in_r1);
    CHECK(rep.concave_in_r2);
    CHECK(rep.worst_violation == doctest::Approx(0.25).epsilon(1e-12));
  }
  SUBCASE("constant table") {
    const auto rep = probe_convex_concave(std::vector<double>(25, 3.5), 5, 5);
    CHECK(rep.convex_in_r1);
    CHECK(rep.concave_in_r2);
    CHECK(rep.worst_violation == 0.0);
  }
  SUBCASE("directions with fewer than three points are vacuously accepted") {
    const auto rep = probe_convex_concave(std::vector<double>{0.0, 5.0, -1.0, 2.0}, 2, 2);
    CHECK(rep.convex_in_r1);
    CHECK(rep.concave_in_r2);
    CHECK(rep.worst_violation == 0.0);
  }
  SUBCASE("any a(r1) + b(r2) with convex a and concave b is accepted") {
    Rng rng(0xFACADE01);
    for (int trial = 0; trial < 50; ++trial) {
      const int m = rng.uniform_int(3, 9), n = rng.uniform_int(3, 9);
      // integrate nonnegative second differences twice for a convex sequence
      std::vector<double> a(m), b(n);
      double slope = rng.uniform(-2.0, 2.0), level = rng.uniform(-5.0, 5.0);
      for (int i = 0; i < m; ++i) {
        a[i] = level;
        level += slope;
        slope += rng.uniform(0.0, 1.0);
      }
      slope = rng.uniform(-2.0, 2.0);
      level = rng.uniform(-5.0, 5.0);
      for (int j = 0; j < n; ++j) {
        b[j] = level;
        level += slope;
        slope -= rng.uniform(0.0, 1.0);
      }
      std::vector<double> t;
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) t.push_back(a[i] + b[j]);
      const auto rep = probe_convex_concave(t, m, n);
      CHECK(rep.convex_in_r1);
      CHECK(rep.concave_in_r2);
    }
  }
}

TEST_CASE("check_absorption") {
  SUBCASE("one-step absorption certifies gamma = 1 at horizon 1") {
    const MarkovGame game = two_state_chain(1.0);
    CHECK(check_absorption(game, 1) == 1.0);
  }
  SUBCASE("half-and-half chain gives 0.75 after two steps") {
    const MarkovGame game = two_state_chain(0.5);
    CHECK(check_absorption(game, 1) == 0.5);
    CHECK(check_absorption(game, 2) == 0.75);
  }
  SUBCASE("a control that traps a state drives gamma to zero") {
    MarkovGame game = two_state_chain(0.5);
    game.kernel.set_row(0, 1, 1, {{0, 1.0}});  // one control pair closes A
    CHECK(check_absorption(game, 10) == 0.0);
  }
  SUBCASE("monotone in the horizon") {
    Rng rng(0xFACADE02);
    for (int trial = 0; trial < 20; ++trial) {
      zsg::testing::RandomGameOptions opts;
      opts.min_states = 4;
      opts.max_states = 12;
      opts.max_grid = 4;
      MarkovGame game = zsg::testing::random_game(rng, opts);
      // absorb at state 0
      game.space.absorbing[0] = 1;
      game.kernel.set_row_all_controls(0, {{0, 1.0}});
      double prev = 0.0;
      for (int horizon = 1; horizon <= 8; horizon *= 2) {
        const double gamma = check_absorption(game, horizon);
        CHECK(gamma >= prev - 1e-15);
        prev = gamma;
      }
    }
  }
}
