#include "zsg/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "zsg/errors.hpp"
#include "zsg/parallel.hpp"

namespace zsg {

std::vector<std::vector<double>> SweepResult::successive_differences(SolveMode mode) const {
  std::vector<std::vector<double>> out;
  for (size_t k = 0; k + 1 < rows.size(); ++k) {
    const auto& coarse = rows[k].probe_values.at(mode);
    const auto& fine = rows[k + 1].probe_values.at(mode);
    std::vector<double> d(coarse.size());
    for (size_t i = 0; i < coarse.size(); ++i) d[i] = std::abs(coarse[i] - fine[i]);
    out.push_back(std::move(d));
  }
  return out;
}

SweepResult h_sweep(const DiffusionGameSpec& spec, std::span<const double> h_list,
                    const std::vector<std::vector<double>>& probe_points,
                    std::span<const SolveMode> modes, double tol, long max_iter) {
  SweepResult result;
  result.num_regimes = spec.num_regimes;
  result.modes.assign(modes.begin(), modes.end());
  result.probe_points = probe_points;
  if (result.probe_points.empty()) {
    std::vector<double> center(static_cast<size_t>(spec.dim));
    for (int d = 0; d < spec.dim; ++d)
      center[static_cast<size_t>(d)] =
          0.5 * (spec.domain.lo[static_cast<size_t>(d)] + spec.domain.hi[static_cast<size_t>(d)]);
    result.probe_points.push_back(std::move(center));
  }
  for (size_t k = 0; k + 1 < h_list.size(); ++k)
    if (!(h_list[k] > h_list[k + 1]))
      throw std::invalid_argument("h_sweep: h_list must be strictly decreasing");

  for (double h : h_list) {
    const auto t0 = std::chrono::steady_clock::now();
    SweepRow row;
    row.h = h;
    const ChainApproximation chain = build_chain(spec, h);
    row.n_states = chain.game.n_states();

    std::optional<ValueFunction> upper, lower;
    for (SolveMode mode : result.modes) {
      SolveOptions opts;
      opts.tol = tol;
      opts.max_iter = max_iter;
      SolveResult sol = solve(chain.game, mode, opts);
      row.iterations[mode] = sol.report.iterations;

      std::vector<double>& probes = row.probe_values[mode];
      for (const auto& point : result.probe_points) {
        const long p = chain.lattice.nearest(point);
        for (int r = 0; r < spec.num_regimes; ++r)
          probes.push_back(sol.value[static_cast<size_t>(chain.state_index(p, r))]);
      }
      if (mode == SolveMode::PureUpper) upper = std::move(sol.value);
      if (mode == SolveMode::PureLower) lower = std::move(sol.value);
    }
    if (upper && lower) row.rho = saddle_gap(*upper, *lower).rho;
    row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.rows.push_back(std::move(row));
  }
  return result;
}

namespace {

// splitmix64: tiny counter-based generator; one independent stream per path,
// so estimates do not depend on how paths are split across workers.
struct SplitMix64 {
  std::uint64_t state;
  explicit SplitMix64(std::uint64_t seed) : state(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

int sample_index(std::span<const double> weights, double u) {
  double acc = 0.0;
  for (size_t k = 0; k < weights.size(); ++k) {
    acc += weights[k];
    if (u < acc) return static_cast<int>(k);
  }
  return static_cast<int>(weights.size()) - 1;
}

int sample_transition(std::span<const Transition> row, double u) {
  double acc = 0.0;
  for (const Transition& t : row) {
    acc += t.prob;
    if (u < acc) return t.target;
  }
  return row.back().target;
}

}  // namespace

SimulationEstimate simulate_cost(const MarkovGame& game, const FeedbackPolicy& policy1,
                                 const FeedbackPolicy& policy2, int start_state, long paths,
                                 long max_steps, std::uint64_t seed) {
  if (paths < 1) throw std::invalid_argument("simulate_cost: paths must be >= 1");
  if (start_state < 0 || start_state >= game.n_states())
    throw std::invalid_argument("simulate_cost: start state out of range");
  for (int x = 0; x < game.n_states(); ++x) {
    if (game.space.is_absorbing(x)) continue;
    if (!policy1.entries[static_cast<size_t>(x)] || !policy2.entries[static_cast<size_t>(x)])
      throw std::invalid_argument("simulate_cost: policy missing at state " +
                                  game.space.names[static_cast<size_t>(x)]);
  }

  std::vector<double> costs(static_cast<size_t>(paths), 0.0);
  std::vector<std::uint8_t> truncated(static_cast<size_t>(paths), 0);

  parallel_for(paths, [&](long begin, long end) {
    for (long path = begin; path < end; ++path) {
      SplitMix64 rng(seed ^ (0xD1B54A32D192ED03ULL * static_cast<std::uint64_t>(path + 1)));
      int x = start_state;
      double disc = 1.0;
      double cost = 0.0;
      bool absorbed = game.space.is_absorbing(x);
      if (absorbed) cost = game.costs.terminal[static_cast<size_t>(x)];
      for (long n = 0; n < max_steps && !absorbed; ++n) {
        const PolicyEntry& e1 = *policy1.entries[static_cast<size_t>(x)];
        const PolicyEntry& e2 = *policy2.entries[static_cast<size_t>(x)];
        const int i = e1.mixed ? sample_index(e1.mu1, rng.uniform()) : e1.r1;
        const int j = e2.mixed ? sample_index(e2.mu2, rng.uniform()) : e2.r2;
        cost += disc * game.costs.run(x, i, j);
        disc *= game.discount[static_cast<size_t>(x)];
        x = sample_transition(game.kernel.row(x, i, j), rng.uniform());
        if (game.space.is_absorbing(x)) {
          cost += disc * game.costs.terminal[static_cast<size_t>(x)];
          absorbed = true;
        }
      }
      costs[static_cast<size_t>(path)] = cost;
      truncated[static_cast<size_t>(path)] = absorbed ? 0 : 1;
    }
  });

  SimulationEstimate est;
  est.paths = paths;
  est.seed = seed;
  double sum = 0.0;
  for (double c : costs) sum += c;
  est.mean = sum / static_cast<double>(paths);
  double ss = 0.0;
  for (double c : costs) ss += (c - est.mean) * (c - est.mean);
  const double sample_std = paths > 1 ? std::sqrt(ss / static_cast<double>(paths - 1)) : 0.0;
  est.std_error = sample_std / std::sqrt(static_cast<double>(paths));
  for (std::uint8_t t : truncated) est.truncated_paths += t;
  est.truncated_fraction = static_cast<double>(est.truncated_paths) / static_cast<double>(paths);
  est.truncation_warning = est.truncated_fraction > 0.01;
  return est;
}

long default_max_steps(const ChainApproximation& chain) {
  double min_dt = std::numeric_limits<double>::infinity();
  for (size_t s = 0; s < chain.dt.size(); ++s)
    if (!chain.game.space.is_absorbing(static_cast<int>(s)) && chain.dt[s] > 0.0)
      min_dt = std::min(min_dt, chain.dt[s]);
  if (!std::isfinite(min_dt)) return 1;
  return static_cast<long>(std::ceil(20.0 / (chain.beta * min_dt)));
}

namespace {

PolyField per_regime(std::vector<double> c, std::vector<std::vector<double>> lin = {},
                     std::vector<std::vector<double>> quad = {}) {
  PolyField f;
  f.constant = std::move(c);
  f.linear = std::move(lin);
  f.quad = std::move(quad);
  return f;
}

DiffusionGameSpec make_separable_1d() {
  DiffusionGameSpec s;
  s.name = "separable-1d";
  s.dim = 1;
  s.num_regimes = 2;
  s.domain = {{0.0}, {1.0}};
  s.u1 = {-1.0, 1.0, 5};
  s.u2 = {-1.0, 1.0, 5};
  s.beta = 1.0;
  s.generator = {-1.0, 1.0, 1.0, -1.0};
  s.covariance = {per_regime({1.0, 1.0})};
  s.drift.family = StructureKind::Separable;
  s.drift.b1 = {per_regime({1.0, 1.0})};
  s.drift.b2 = {per_regime({1.0, 1.0})};
  // k = r1^2 - r2^2 + x^2 (regime 0), with the state term halved in regime 1
  s.running_cost.p0 = per_regime({0.0, 0.0}, {}, {{1.0}, {0.5}});
  s.running_cost.p11 = per_regime({1.0, 1.0});
  s.running_cost.p22 = per_regime({-1.0, -1.0});
  s.terminal_cost = per_regime({0.0, 0.0}, {}, {{1.0}, {0.5}});
  s.structure = StructureKind::Separable;
  return s;
}

DiffusionGameSpec make_bilinear_2d() {
  DiffusionGameSpec s;
  s.name = "bilinear-2d";
  s.dim = 2;
  s.num_regimes = 2;
  s.domain = {{0.0, 0.0}, {1.0, 1.0}};
  s.u1 = {-1.0, 1.0, 5};
  s.u2 = {-1.0, 1.0, 5};
  s.beta = 1.0;
  s.generator = {-0.5, 0.5, 0.5, -0.5};
  s.covariance = {per_regime({1.0, 1.0}), per_regime({0.25, 0.25}),
                  per_regime({0.25, 0.25}), per_regime({1.0, 1.0})};
  // pursuer/evader interaction through the r1 r2 coupling; the coupling
  // direction flips with the regime
  s.drift.family = StructureKind::Bilinear;
  s.drift.b0 = {per_regime({1.0, -1.0}), per_regime({1.0, -1.0})};
  s.drift.b3 = {per_regime({0.1, 0.1}), per_regime({-0.1, -0.1})};
  s.running_cost.p0 = per_regime({0.0, 0.0}, {}, {{0.5, 0.5}, {0.375, 0.375}});
  s.running_cost.p11 = per_regime({1.0, 1.0});
  s.running_cost.p22 = per_regime({-1.0, -1.0});
  s.running_cost.p12 = per_regime({0.5, 0.5});
  s.terminal_cost = per_regime({0.0, 0.0}, {}, {{0.5, 0.5}, {0.5, 0.5}});
  s.structure = StructureKind::Bilinear;
  return s;
}

DiffusionGameSpec make_regime_contrast() {
  DiffusionGameSpec s;
  s.name = "regime-contrast";
  s.dim = 1;
  s.num_regimes = 2;
  s.domain = {{0.0}, {1.0}};
  s.u1 = {-1.0, 1.0, 5};
  s.u2 = {-1.0, 1.0, 5};
  s.beta = 1.0;
  s.generator = {-2.0, 2.0, 2.0, -2.0};
  s.covariance = {per_regime({1.0, 1.0})};
  // identical dynamics except the drift sign flips with the regime
  s.drift.family = StructureKind::Separable;
  s.drift.b1 = {per_regime({1.0, -1.0})};
  s.drift.b2 = {per_regime({1.0, -1.0})};
  s.running_cost.p0 = per_regime({0.0, 0.0}, {{1.0}, {1.0}}, {{-1.0}, {-1.0}});  // x(1-x)
  s.running_cost.p11 = per_regime({1.0, 1.0});
  s.running_cost.p22 = per_regime({-1.0, -1.0});
  s.terminal_cost = per_regime({0.0, 0.0});
  s.structure = StructureKind::Separable;
  return s;
}

MarkovGame make_pennies_chain() {
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

}  // namespace

const std::vector<BuiltinProblem>& builtin_examples() {
  static const std::vector<BuiltinProblem> all = [] {
    std::vector<BuiltinProblem> v;
    v.push_back({"separable-1d",
                 "1-D two-regime diffusion, drift r1 + r2, cost r1^2 - r2^2 + x^2",
                 make_separable_1d(), std::nullopt});
    v.push_back({"bilinear-2d",
                 "2-D two-regime pursuit-evasion-flavored game with r1*r2 drift coupling",
                 make_bilinear_2d(), std::nullopt});
    v.push_back({"pennies-chain",
                 "discrete matching-pennies game, one-step absorption, no pure saddle",
                 std::nullopt, make_pennies_chain()});
    v.push_back({"regime-contrast",
                 "1-D diffusion with sign-flipped drift per regime and strong regime coupling",
                 make_regime_contrast(), std::nullopt});
    return v;
  }();
  return all;
}

const BuiltinProblem* find_builtin(const std::string& name) {
  for (const auto& b : builtin_examples())
    if (b.name == name) return &b;
  return nullptr;
}

}  // namespace zsg
