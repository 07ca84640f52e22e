#include <doctest.h>

#include <cmath>

#include "test_support.hpp"
#include "zsg/errors.hpp"
#include "zsg/solver.hpp"

using namespace zsg;
using zsg::testing::Rng;

namespace {

// Single transient state A feeding an absorbing sink, with the running cost
// given by a function of the two control values on 5-point grids over [-1,1].
template <typename F>
MarkovGame one_state_game(F cost, int grid_points = 5) {
  StateSpace space;
  space.names = {"A", "Sink"};
  space.absorbing = {0, 1};
  MarkovGame game = MarkovGame::create(std::move(space), {-1.0, 1.0, grid_points},
                                       {-1.0, 1.0, grid_points});
  game.kernel.set_row_all_controls(0, {{1, 1.0}});
  for (int i = 0; i < game.n1(); ++i)
    for (int j = 0; j < game.n2(); ++j)
      game.costs.run(0, i, j) = cost(game.grid1.point(i), game.grid2.point(j));
  return game;
}

ValueFunction random_values(Rng& rng, size_t n, double range) {
  ValueFunction v(n);
  for (double& x : v) x = rng.uniform(-range, range);
  return v;
}

double sup_diff(const ValueFunction& a, const ValueFunction& b) {
  double d = 0.0;
  for (size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace

TEST_CASE("bellman steps on hand-solved one-state games") {
  SUBCASE("separable quadratic cost r1^2 - r2^2 gives 0 in all modes") {
    const MarkovGame game = one_state_game([](double a, double b) { return a * a - b * b; });
    const ValueFunction v(2, 0.0);
    CHECK(bellman_upper_step(game, v)[0] == 0.0);
    CHECK(bellman_lower_step(game, v)[0] == 0.0);
    CHECK(bellman_relaxed_step(game, v)[0] == 0.0);
  }
  SUBCASE("matching pennies cost: upper 1, lower -1, relaxed 0") {
    const MarkovGame game = zsg::testing::pennies_game();
    const ValueFunction v(2, 0.0);
    CHECK(bellman_upper_step(game, v)[0] == 1.0);
    CHECK(bellman_lower_step(game, v)[0] == -1.0);
    CHECK(bellman_relaxed_step(game, v)[0] == 0.0);
  }
  SUBCASE("zero cost, zero values stay zero") {
    const MarkovGame game = one_state_game([](double, double) { return 0.0; });
    const ValueFunction v(2, 0.0);
    CHECK(bellman_upper_step(game, v) == ValueFunction{0.0, 0.0});
    CHECK(bellman_lower_step(game, v) == ValueFunction{0.0, 0.0});
  }
  SUBCASE("absorbing states hold the terminal cost in every iterate") {
    Rng rng(0xABCD0001);
    MarkovGame game = one_state_game([](double a, double b) { return a - b; });
    game.costs.terminal[1] = 7.25;
    for (int trial = 0; trial < 5; ++trial) {
      const ValueFunction v = random_values(rng, 2, 50.0);
      CHECK(bellman_upper_step(game, v)[1] == 7.25);
      CHECK(bellman_lower_step(game, v)[1] == 7.25);
      CHECK(bellman_relaxed_step(game, v)[1] == 7.25);
    }
  }
}

TEST_CASE("solve on the matching-pennies chain") {
  const MarkovGame game = zsg::testing::pennies_game();
  const auto upper = solve(game, SolveMode::PureUpper);
  const auto lower = solve(game, SolveMode::PureLower);
  const auto relaxed_up = solve(game, SolveMode::RelaxedUpper);
  const auto relaxed_lo = solve(game, SolveMode::RelaxedLower);
  CHECK(upper.value[0] == 1.0);
  CHECK(lower.value[0] == -1.0);
  CHECK(std::abs(relaxed_up.value[0]) <= 1e-12);
  CHECK(std::abs(relaxed_lo.value[0]) <= 1e-12);
  CHECK(upper.report.converged);
  CHECK(upper.report.certificate_route == "absorption");
  CHECK(upper.report.contraction_certificate == 1.0);  // absorbs in one step

  const auto gap = saddle_gap(upper.value, lower.value);
  CHECK(gap.rho == 2.0);
  CHECK(gap.argmax_state == 0);
}

TEST_CASE("solve diagnostics and failure modes") {
  SUBCASE("zero cost, zero terminal: value is identically zero in all modes") {
    Rng rng(0xABCD0002);
    zsg::testing::RandomGameOptions opts;
    opts.max_states = 12;
    opts.max_grid = 4;
    opts.cost_range = 0.0;
    MarkovGame game = zsg::testing::random_game(rng, opts);
    for (const SolveMode mode : {SolveMode::PureUpper, SolveMode::PureLower,
                                 SolveMode::RelaxedUpper, SolveMode::RelaxedLower}) {
      const auto sol = solve(game, mode);
      for (double v : sol.value) CHECK(std::abs(v) <= 1e-12);
    }
  }
  SUBCASE("undiscounted game with an escapable trap is refused") {
    StateSpace space;
    space.names = {"A", "Sink"};
    space.absorbing = {0, 1};
    MarkovGame game = MarkovGame::create(std::move(space), {0.0, 1.0, 2}, {0.0, 1.0, 2});
    game.kernel.set_row_all_controls(0, {{1, 1.0}});
    game.kernel.set_row(0, 1, 1, {{0, 1.0}});  // the maximizer can trap at A
    CHECK(check_absorption(game) == 0.0);
    CHECK_THROWS_AS(solve(game, SolveMode::PureUpper), NotContractiveError);
  }
  SUBCASE("invalid game is rejected before iterating") {
    MarkovGame game = zsg::testing::pennies_game();
    game.kernel.set_row(0, 0, 0, {{1, 0.5}});
    CHECK_THROWS_AS(solve(game, SolveMode::PureUpper), GameValidationError);
  }
  SUBCASE("hitting max_iter reports converged = false and keeps the best iterate") {
    Rng rng(0xABCD0003);
    zsg::testing::RandomGameOptions opts;
    opts.min_states = 8;
    opts.max_states = 12;
    MarkovGame game = zsg::testing::random_game(rng, opts);
    SolveOptions short_run;
    short_run.tol = 1e-12;
    short_run.max_iter = 3;
    const auto sol = solve(game, SolveMode::PureUpper, short_run);
    CHECK(!sol.report.converged);
    CHECK(sol.report.iterations == 3);
    CHECK(sol.report.final_residual > 1e-12);
  }
  SUBCASE("saddle_gap rejects mismatched state spaces") {
    CHECK_THROWS_AS(saddle_gap(ValueFunction(3, 0.0), ValueFunction(2, 0.0)),
                    MismatchedStateSpacesError);
  }
  SUBCASE("saddle_gap of identical values is zero") {
    const ValueFunction v{1.0, -2.0, 3.0};
    CHECK(saddle_gap(v, v).rho == 0.0);
  }
}

TEST_CASE("Bellman sweeps contract and preserve order") {
  Rng rng(0xABCD0004);
  for (int trial = 0; trial < 10; ++trial) {
    zsg::testing::RandomGameOptions opts;
    opts.min_states = 4;
    opts.max_states = 16;
    opts.max_grid = 5;
    opts.min_discount = 0.40;
    opts.max_discount = 0.90;
    const MarkovGame game = zsg::testing::random_game(rng, opts);
    double kappa = 0.0;
    for (double d : game.discount) kappa = std::max(kappa, d);

    const size_t n = static_cast<size_t>(game.n_states());
    const ValueFunction v = random_values(rng, n, 10.0);
    const ValueFunction w = random_values(rng, n, 10.0);

    CHECK(sup_diff(bellman_upper_step(game, v), bellman_upper_step(game, w)) <=
          kappa * sup_diff(v, w) + 1e-12);
    CHECK(sup_diff(bellman_lower_step(game, v), bellman_lower_step(game, w)) <=
          kappa * sup_diff(v, w) + 1e-12);
    CHECK(sup_diff(bellman_relaxed_step(game, v), bellman_relaxed_step(game, w)) <=
          kappa * sup_diff(v, w) + 1e-10);

    // monotonicity: v <= w pointwise implies step(v) <= step(w) pointwise
    ValueFunction above = v;
    for (double& x : above) x += rng.uniform(0.0, 5.0);
    for (auto step : {bellman_upper_step, bellman_lower_step}) {
      const ValueFunction sv = step(game, v);
      const ValueFunction sa = step(game, above);
      for (size_t x = 0; x < n; ++x) CHECK(sv[x] <= sa[x] + 1e-12);
    }
    const ValueFunction rv = bellman_relaxed_step(game, v);
    const ValueFunction ra = bellman_relaxed_step(game, above);
    for (size_t x = 0; x < n; ++x) CHECK(rv[x] <= ra[x] + 1e-10);
  }
}

TEST_CASE("fixed point is independent of the initial guess") {
  Rng rng(0xABCD0005);
  for (int trial = 0; trial < 10; ++trial) {
    zsg::testing::RandomGameOptions opts;
    opts.min_states = 4;
    opts.max_states = 20;
    opts.max_grid = 5;
    opts.min_discount = 0.30;
    opts.max_discount = 0.80;
    const MarkovGame game = zsg::testing::random_game(rng, opts);
    SolveOptions opts_a;
    opts_a.tol = 1e-9;
    SolveOptions opts_b = opts_a;
    opts_b.v0 = random_values(rng, static_cast<size_t>(game.n_states()), 100.0);
    const auto a = solve(game, SolveMode::PureUpper, opts_a);
    const auto b = solve(game, SolveMode::PureUpper, opts_b);
    CHECK(a.report.converged);
    CHECK(b.report.converged);
    CHECK(sup_diff(a.value, b.value) <= 10.0 * opts_a.tol);
  }
}

TEST_CASE("solved values are ordered: pure lower <= relaxed <= pure upper") {
  Rng rng(0xABCD0006);
  for (int trial = 0; trial < 6; ++trial) {
    zsg::testing::RandomGameOptions opts;
    opts.min_states = 4;
    opts.max_states = 12;
    opts.max_grid = 5;
    opts.min_discount = 0.40;
    opts.max_discount = 0.90;
    const MarkovGame game = zsg::testing::random_game(rng, opts);
    SolveOptions sopts;
    sopts.tol = 1e-10;
    const auto lo = solve(game, SolveMode::PureLower, sopts);
    const auto up = solve(game, SolveMode::PureUpper, sopts);
    const auto ru = solve(game, SolveMode::RelaxedUpper, sopts);
    const auto rl = solve(game, SolveMode::RelaxedLower, sopts);
    for (size_t x = 0; x < up.value.size(); ++x) {
      CHECK(lo.value[x] <= ru.value[x] + 1e-9);
      CHECK(rl.value[x] <= up.value[x] + 1e-9);
      CHECK(lo.value[x] <= up.value[x] + 1e-9);
    }
    // the two relaxed routes agree far inside 10*tol
    CHECK(sup_diff(ru.value, rl.value) <= 1e-9);
  }
}

TEST_CASE("separable games have no saddle gap") {
  Rng rng(0xABCD0007);
  for (int trial = 0; trial < 10; ++trial) {
    zsg::testing::RandomGameOptions opts;
    opts.min_states = 4;
    opts.max_states = 20;
    opts.max_grid = 6;
    opts.min_discount = 0.40;
    opts.max_discount = 0.90;
    opts.control_independent_kernel = true;
    opts.separable_costs = true;
    const MarkovGame game = zsg::testing::random_game(rng, opts);
    CHECK(validate_game(game).empty());
    SolveOptions sopts;
    sopts.tol = 1e-10;
    const auto up = solve(game, SolveMode::PureUpper, sopts);
    const auto lo = solve(game, SolveMode::PureLower, sopts);
    CHECK(saddle_gap(up.value, lo.value).rho <= 1e-9);
  }
}

TEST_CASE("convex-concave matrices with centered grids have no saddle gap") {
  // Quadratic saddle costs kappa*r1*r2 + a*r1^2 - b*r2^2 on odd centered grids:
  // every Bellman matrix keeps its saddle on the grid, so the pure gap closes.
  Rng rng(0xABCD0008);
  for (int trial = 0; trial < 6; ++trial) {
    const int n = rng.uniform_int(3, 10);
    StateSpace space;
    for (int x = 0; x < n; ++x) space.names.push_back("s" + std::to_string(x));
    space.absorbing.assign(static_cast<size_t>(n), 0);
    MarkovGame game = MarkovGame::create(std::move(space), {-1.0, 1.0, 5}, {-1.0, 1.0, 5});
    for (int x = 0; x < n; ++x) {
      game.discount[static_cast<size_t>(x)] = rng.uniform(0.4, 0.9);
      std::vector<Transition> row;
      double sum = 0.0;
      for (int y = 0; y < n; ++y) {
        const double w = 0.05 + rng.uniform();
        row.push_back({y, w});
        sum += w;
      }
      for (auto& t : row) t.prob /= sum;
      game.kernel.set_row_all_controls(x, row);
      const double a = rng.uniform(0.5, 2.0);
      const double b = rng.uniform(0.5, 2.0);
      const double kappa = rng.uniform(-1.0, 1.0);
      const double base = rng.uniform(-2.0, 2.0);
      for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) {
          const double r1 = game.grid1.point(i), r2 = game.grid2.point(j);
          game.costs.run(x, i, j) = base + a * r1 * r1 - b * r2 * r2 + kappa * r1 * r2;
        }
    }
    SolveOptions sopts;
    sopts.tol = 1e-10;
    const auto up = solve(game, SolveMode::PureUpper, sopts);
    const auto lo = solve(game, SolveMode::PureLower, sopts);
    // sampled iterates pass the probe
    const auto probe = probe_convex_concave(
        bellman_matrix(game, up.value, 0).a, game.n1(), game.n2());
    CHECK(probe.convex_in_r1);
    CHECK(probe.concave_in_r2);
    CHECK(saddle_gap(up.value, lo.value).rho <= 1e-9);
    // relaxed solves agree with each other on these games
    const auto ru = solve(game, SolveMode::RelaxedUpper, sopts);
    const auto rl = solve(game, SolveMode::RelaxedLower, sopts);
    CHECK(sup_diff(ru.value, rl.value) <= 1e-9);
  }
}

TEST_CASE("extract_policies") {
  SUBCASE("matching pennies, relaxed: (1/2, 1/2) for both players") {
    const MarkovGame game = zsg::testing::pennies_game();
    const auto sol = solve(game, SolveMode::RelaxedUpper);
    const auto policy = extract_policies(game, sol.value, SolveMode::RelaxedUpper);
    REQUIRE(policy.entries[0].has_value());
    CHECK(!policy.entries[1].has_value());  // absorbing states carry no policy
    CHECK(policy.entries[0]->mixed);
    for (double p : policy.entries[0]->mu1) CHECK(p == doctest::Approx(0.5).epsilon(1e-9));
    for (double p : policy.entries[0]->mu2) CHECK(p == doctest::Approx(0.5).epsilon(1e-9));
  }
  SUBCASE("separable quadratic: pure policy at the grid zero") {
    const MarkovGame game = one_state_game([](double a, double b) { return a * a - b * b; });
    const auto sol = solve(game, SolveMode::PureUpper);
    const auto policy = extract_policies(game, sol.value, SolveMode::PureUpper);
    REQUIRE(policy.entries[0].has_value());
    CHECK(!policy.entries[0]->mixed);
    CHECK(policy.entries[0]->r1 == 2);
    CHECK(policy.entries[0]->r2 == 2);
    // relaxed extraction recognizes the pure saddle
    const auto relaxed = extract_policies(game, sol.value, SolveMode::RelaxedUpper);
    CHECK(!relaxed.entries[0]->mixed);
  }
}
