#include "test_support.hpp"

#include <algorithm>
#include <numeric>

namespace zsg::testing {

MarkovGame random_game(Rng& rng, const RandomGameOptions& opts) {
  const int n = rng.uniform_int(opts.min_states, opts.max_states);
  const int n1 = rng.uniform_int(opts.min_grid, opts.max_grid);
  const int n2 = rng.uniform_int(opts.min_grid, opts.max_grid);

  StateSpace space;
  for (int x = 0; x < n; ++x) space.names.push_back("s" + std::to_string(x));
  space.absorbing.assign(static_cast<size_t>(n), 0);

  MarkovGame game = MarkovGame::create(std::move(space), {-1.0, 1.0, n1}, {-1.0, 1.0, n2});

  auto random_row = [&]() {
    const int targets = std::min(n, rng.uniform_int(2, opts.max_row_targets));
    std::vector<int> picks;
    while (static_cast<int>(picks.size()) < targets) {
      const int y = rng.uniform_int(0, n - 1);
      if (std::find(picks.begin(), picks.end(), y) == picks.end()) picks.push_back(y);
    }
    std::vector<Transition> row;
    double sum = 0.0;
    for (int y : picks) {
      const double w = 0.05 + rng.uniform();
      row.push_back({y, w});
      sum += w;
    }
    for (Transition& t : row) t.prob /= sum;
    return row;
  };

  for (int x = 0; x < n; ++x) {
    game.discount[static_cast<size_t>(x)] = rng.uniform(opts.min_discount, opts.max_discount);
    if (opts.control_independent_kernel) {
      game.kernel.set_row_all_controls(x, random_row());
    } else {
      for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n2; ++j) game.kernel.set_row(x, i, j, random_row());
    }
    game.costs.terminal[static_cast<size_t>(x)] = rng.uniform(-opts.cost_range, opts.cost_range);
  }

  if (opts.separable_costs) {
    game.structure.kind = StructureKind::Separable;
    game.structure.part1.resize(static_cast<size_t>(n) * n1);
    game.structure.part2.resize(static_cast<size_t>(n) * n2);
    for (int x = 0; x < n; ++x) {
      for (int i = 0; i < n1; ++i)
        game.structure.part1[static_cast<size_t>(x) * n1 + i] =
            rng.uniform(-opts.cost_range, opts.cost_range);
      for (int j = 0; j < n2; ++j)
        game.structure.part2[static_cast<size_t>(x) * n2 + j] =
            rng.uniform(-opts.cost_range, opts.cost_range);
      for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n2; ++j)
          game.costs.run(x, i, j) = game.structure.part1[static_cast<size_t>(x) * n1 + i] +
                                    game.structure.part2[static_cast<size_t>(x) * n2 + j];
    }
  } else {
    for (int x = 0; x < n; ++x)
      for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n2; ++j)
          game.costs.run(x, i, j) = rng.uniform(-opts.cost_range, opts.cost_range);
  }
  return game;
}

MarkovGame pennies_game() {
  StateSpace space;
  space.names = {"A", "Done"};
  space.absorbing = {0, 1};
  MarkovGame game = MarkovGame::create(std::move(space), {-1.0, 1.0, 2}, {-1.0, 1.0, 2});
  game.kernel.set_row_all_controls(0, {{1, 1.0}});
  game.costs.run(0, 0, 0) = 1.0;
  game.costs.run(0, 0, 1) = -1.0;
  game.costs.run(0, 1, 0) = -1.0;
  game.costs.run(0, 1, 1) = 1.0;
  return game;
}

}  // namespace zsg::testing
