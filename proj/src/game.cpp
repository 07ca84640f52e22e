#include "zsg/game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace zsg {

int StateSpace::index_of(const std::string& name) const {
  for (size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return static_cast<int>(i);
  return -1;
}

std::vector<double> ControlGrid::points() const {
  std::vector<double> p(static_cast<size_t>(n_points));
  for (int k = 0; k < n_points; ++k) p[static_cast<size_t>(k)] = point(k);
  return p;
}

void TransitionKernel::set_row_all_controls(int x, const std::vector<Transition>& row) {
  for (int i = 0; i < n1_; ++i)
    for (int j = 0; j < n2_; ++j) rows_[idx(x, i, j)] = row;
}

const char* to_string(StructureKind k) {
  switch (k) {
    case StructureKind::General: return "general";
    case StructureKind::Separable: return "separable";
    case StructureKind::Bilinear: return "bilinear";
  }
  return "general";
}

MarkovGame MarkovGame::create(StateSpace space, ControlGrid g1, ControlGrid g2) {
  MarkovGame game;
  const int n = space.size();
  game.space = std::move(space);
  game.grid1 = g1;
  game.grid2 = g2;
  game.kernel = TransitionKernel(n, g1.size(), g2.size());
  game.costs = CostModel(n, g1.size(), g2.size());
  game.discount.assign(static_cast<size_t>(n), 1.0);
  for (int x = 0; x < n; ++x)
    if (game.space.is_absorbing(x)) game.kernel.set_row_all_controls(x, {{x, 1.0}});
  return game;
}

namespace {

std::string control_pair(int r1, int r2) {
  std::ostringstream os;
  os << "(r1=" << r1 << ", r2=" << r2 << ")";
  return os.str();
}

}  // namespace

std::vector<Violation> validate_game(const MarkovGame& game) {
  constexpr double kProbTol = 1e-12;
  std::vector<Violation> out;
  const int n = game.n_states();
  const int n1 = game.n1();
  const int n2 = game.n2();

  if (n == 0) {
    out.push_back({"state space is empty"});
    return out;
  }
  {
    std::unordered_set<std::string> seen;
    for (int x = 0; x < n; ++x)
      if (!seen.insert(game.space.names[static_cast<size_t>(x)]).second)
        out.push_back({"duplicate state name '" + game.space.names[static_cast<size_t>(x)] + "'", x});
  }
  if (game.space.absorbing.size() != static_cast<size_t>(n))
    out.push_back({"absorbing mask size mismatch"});

  for (const ControlGrid* g : {&game.grid1, &game.grid2}) {
    if (g->n_points < 1) out.push_back({"control grid has no points"});
    if (g->lo > g->hi) out.push_back({"control grid lo > hi"});
  }
  if (game.kernel.n_states() != n || game.kernel.n1() != n1 || game.kernel.n2() != n2)
    out.push_back({"kernel dimensions do not match the game"});
  if (game.costs.n_states != n || game.costs.n1 != n1 || game.costs.n2 != n2)
    out.push_back({"cost table dimensions do not match the game"});
  if (game.discount.size() != static_cast<size_t>(n))
    out.push_back({"discount table size mismatch"});
  if (!out.empty()) return out;  // index checks below need consistent sizes

  bool all_undiscounted = true;
  for (int x = 0; x < n; ++x) {
    const double d = game.discount[static_cast<size_t>(x)];
    if (!(d > 0.0) || d > 1.0) {
      std::ostringstream os;
      os << "discount " << d << " outside (0,1] at state " << game.space.names[static_cast<size_t>(x)];
      out.push_back({os.str(), x});
    }
    if (d < 1.0) all_undiscounted = false;
  }

  bool any_absorbing = false;
  for (int x = 0; x < n; ++x) any_absorbing = any_absorbing || game.space.is_absorbing(x);
  if (all_undiscounted && !any_absorbing)
    out.push_back({"no absorbing states and no discount"});

  for (int x = 0; x < n; ++x) {
    for (int i = 0; i < n1; ++i) {
      for (int j = 0; j < n2; ++j) {
        const auto row = game.kernel.row(x, i, j);
        double sum = 0.0;
        double self_mass = 0.0;
        for (const Transition& t : row) {
          if (t.target < 0 || t.target >= n) {
            out.push_back({"transition target out of range " + control_pair(i, j), x, i, j});
            continue;
          }
          if (t.prob < -kProbTol || t.prob > 1.0 + kProbTol) {
            std::ostringstream os;
            os << "probability " << t.prob << " outside [0,1] " << control_pair(i, j);
            out.push_back({os.str(), x, i, j});
          }
          sum += t.prob;
          if (t.target == x) self_mass += t.prob;
        }
        if (std::abs(sum - 1.0) > kProbTol) {
          std::ostringstream os;
          os << "kernel row sums to " << sum << " at state "
             << game.space.names[static_cast<size_t>(x)] << " " << control_pair(i, j);
          out.push_back({os.str(), x, i, j});
        }
        if (game.space.is_absorbing(x) && std::abs(self_mass - 1.0) > kProbTol)
          out.push_back({"absorbing state is not a self-loop " + control_pair(i, j), x, i, j});
      }
    }
    if (!std::isfinite(game.costs.terminal[static_cast<size_t>(x)]))
      out.push_back({"non-finite terminal cost", x});
    for (int i = 0; i < n1; ++i)
      for (int j = 0; j < n2; ++j)
        if (!std::isfinite(game.costs.run(x, i, j)))
          out.push_back({"non-finite running cost " + control_pair(i, j), x, i, j});
  }

  // Declared structure must hold exactly on the grid.
  if (game.structure.kind == StructureKind::Separable) {
    const bool has_parts = !game.structure.part1.empty() || !game.structure.part2.empty();
    if (has_parts && (game.structure.part1.size() != static_cast<size_t>(n) * n1 ||
                      game.structure.part2.size() != static_cast<size_t>(n) * n2)) {
      out.push_back({"separable parts have wrong dimensions"});
    } else {
      for (int x = 0; x < n; ++x) {
        double worst = 0.0;
        int wi = 0, wj = 0;
        for (int i = 0; i < n1; ++i) {
          for (int j = 0; j < n2; ++j) {
            double resid;
            if (has_parts) {
              resid = game.costs.run(x, i, j) -
                      game.structure.part1[static_cast<size_t>(x) * n1 + i] -
                      game.structure.part2[static_cast<size_t>(x) * n2 + j];
            } else {
              // additive separability <=> all cross differences vanish
              resid = game.costs.run(x, i, j) - game.costs.run(x, i, 0) -
                      game.costs.run(x, 0, j) + game.costs.run(x, 0, 0);
            }
            if (std::abs(resid) > std::abs(worst)) {
              worst = resid;
              wi = i;
              wj = j;
            }
          }
        }
        if (std::abs(worst) > 1e-12) {
          std::ostringstream os;
          os << "cost is not separable: residual " << worst << " " << control_pair(wi, wj);
          out.push_back({os.str(), x, wi, wj});
        }
      }
    }
  } else if (game.structure.kind == StructureKind::Bilinear) {
    for (int x = 0; x < n; ++x) {
      std::vector<double> slice(static_cast<size_t>(n1) * n2);
      for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n2; ++j) slice[static_cast<size_t>(i) * n2 + j] = game.costs.run(x, i, j);
      const auto probe = probe_convex_concave(slice, n1, n2);
      if (!probe.convex_in_r1 || !probe.concave_in_r2) {
        std::ostringstream os;
        os << "declared convex-concave cost fails the midpoint probe (violation "
           << probe.worst_violation << ")";
        out.push_back({os.str(), x});
      }
    }
  }

  return out;
}

ConvexConcaveReport probe_convex_concave(std::span<const double> f, int m, int n) {
  constexpr double kTol = 1e-12;
  ConvexConcaveReport rep;
  rep.worst_violation = -std::numeric_limits<double>::infinity();
  bool checked = false;
  auto at = [&](int i, int j) { return f[static_cast<size_t>(i) * n + j]; };

  if (m >= 3) {
    for (int j = 0; j < n; ++j) {
      for (int i = 1; i + 1 < m; ++i) {
        const double defect = at(i, j) - 0.5 * (at(i - 1, j) + at(i + 1, j));
        rep.worst_violation = std::max(rep.worst_violation, defect);
        if (defect > kTol) rep.convex_in_r1 = false;
        checked = true;
      }
    }
  }
  if (n >= 3) {
    for (int i = 0; i < m; ++i) {
      for (int j = 1; j + 1 < n; ++j) {
        const double defect = 0.5 * (at(i, j - 1) + at(i, j + 1)) - at(i, j);
        rep.worst_violation = std::max(rep.worst_violation, defect);
        if (defect > kTol) rep.concave_in_r2 = false;
        checked = true;
      }
    }
  }
  if (!checked) rep.worst_violation = 0.0;
  return rep;
}

double check_absorption(const MarkovGame& game, int horizon) {
  const int n = game.n_states();
  if (horizon <= 0) horizon = n;
  std::vector<double> p(static_cast<size_t>(n), 0.0), next(static_cast<size_t>(n), 0.0);
  for (int x = 0; x < n; ++x)
    if (game.space.is_absorbing(x)) p[static_cast<size_t>(x)] = 1.0;

  for (int k = 0; k < horizon; ++k) {
    for (int x = 0; x < n; ++x) {
      if (game.space.is_absorbing(x)) {
        next[static_cast<size_t>(x)] = 1.0;
        continue;
      }
      double worst = std::numeric_limits<double>::infinity();
      for (int i = 0; i < game.n1(); ++i) {
        for (int j = 0; j < game.n2(); ++j) {
          double mass = 0.0;
          for (const Transition& t : game.kernel.row(x, i, j))
            mass += t.prob * p[static_cast<size_t>(t.target)];
          worst = std::min(worst, mass);
        }
      }
      next[static_cast<size_t>(x)] = worst;
    }
    p.swap(next);
  }

  double gamma = 1.0;
  for (int x = 0; x < n; ++x)
    if (!game.space.is_absorbing(x)) gamma = std::min(gamma, p[static_cast<size_t>(x)]);
  return gamma;
}

}  // namespace zsg
