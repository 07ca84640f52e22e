#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "zsg/chain.hpp"
#include "zsg/solver.hpp"

namespace zsg {

struct SweepRow {
  double h = 0.0;
  int n_states = 0;
  // Probe values per mode, flattened as (probe index major, regime minor).
  std::map<SolveMode, std::vector<double>> probe_values;
  std::map<SolveMode, long> iterations;
  double rho = std::numeric_limits<double>::quiet_NaN();  // set when both pure modes ran
  double wall_seconds = 0.0;  // informational; excluded from CSV output
};

struct SweepResult {
  std::vector<std::vector<double>> probe_points;
  int num_regimes = 1;
  std::vector<SolveMode> modes;
  std::vector<SweepRow> rows;  // ordered by decreasing h

  /// |V^{h_k} - V^{h_{k+1}}| per probe entry, one vector per consecutive pair.
  std::vector<std::vector<double>> successive_differences(SolveMode mode) const;
};

/// Builds and solves the chain at every mesh in h_list (strictly decreasing),
/// recording values at the lattice point nearest each probe point for every
/// regime. Empty probe list defaults to the domain center.
SweepResult h_sweep(const DiffusionGameSpec& spec, std::span<const double> h_list,
                    const std::vector<std::vector<double>>& probe_points,
                    std::span<const SolveMode> modes, double tol = 1e-9,
                    long max_iter = 1000000);

struct SimulationEstimate {
  double mean = 0.0;
  double std_error = 0.0;  // sample std / sqrt(paths)
  long paths = 0;
  std::uint64_t seed = 0;
  long truncated_paths = 0;
  double truncated_fraction = 0.0;
  bool truncation_warning = false;  // > 1% of paths hit max_steps
};

/// Monte-Carlo estimate of the discounted exit cost from start_state under
/// fixed feedback policies (player 1's side of policy1, player 2's side of
/// policy2). Discount accumulates multiplicatively per visited state, which
/// on an approximating chain equals e^{-beta t_n}; the terminal cost is
/// discounted the same way. Per-path generators derive from (seed, path), so
/// the estimate is bit-identical for any worker count.
SimulationEstimate simulate_cost(const MarkovGame& game, const FeedbackPolicy& policy1,
                                 const FeedbackPolicy& policy2, int start_state,
                                 long paths, long max_steps, std::uint64_t seed);

/// Default horizon: ceil(20 / (beta * min dt)), i.e. 20 discount time
/// constants, after which the discounted tail is below e^{-20} of the cost
/// bound.
long default_max_steps(const ChainApproximation& chain);

struct BuiltinProblem {
  std::string name;
  std::string description;
  std::optional<DiffusionGameSpec> diffusion;
  std::optional<MarkovGame> game;  // discrete problems
};

/// Ready-made example problems:
///   separable-1d    1-D, 2 regimes, drift r1 + r2, cost r1^2 - r2^2 + x^2 ((A6))
///   bilinear-2d     2-D, 2 regimes, drift r1 r2 b0 + b3, convex-concave cost ((A7))
///   pennies-chain   discrete matching-pennies game with a one-step absorber
///   regime-contrast 1-D, drift sign flipped per regime, symmetric generator
const std::vector<BuiltinProblem>& builtin_examples();
const BuiltinProblem* find_builtin(const std::string& name);

}  // namespace zsg
