#pragma once

#include <optional>
#include <string>
#include <vector>

#include "zsg/game.hpp"
#include "zsg/matrix_game.hpp"

namespace zsg {

enum class SolveMode { PureUpper, PureLower, RelaxedUpper, RelaxedLower };

const char* to_string(SolveMode m);
std::optional<SolveMode> solve_mode_from_string(const std::string& s);
inline bool is_relaxed(SolveMode m) {
  return m == SolveMode::RelaxedUpper || m == SolveMode::RelaxedLower;
}

/// Map state index -> value. Absorbing states hold the terminal cost in every
/// iterate produced by the Bellman operators.
using ValueFunction = std::vector<double>;

struct SolveReport {
  SolveMode mode = SolveMode::PureUpper;
  long iterations = 0;
  double final_residual = 0.0;  // sup-norm of the last update
  bool converged = false;
  double contraction_certificate = 0.0;  // kappa (discount route) or gamma (absorption route)
  std::string certificate_route;         // "discount" | "absorption"
};

/// Per-state optimal controls extracted from a solved value function:
/// a pure index pair for pure modes, per-player mixed strategies for relaxed
/// modes (pure pair when the state's matrix has a pure saddle). Absorbing
/// states carry no entry.
struct PolicyEntry {
  bool mixed = false;
  int r1 = 0, r2 = 0;
  std::vector<double> mu1, mu2;
};

struct FeedbackPolicy {
  std::vector<std::optional<PolicyEntry>> entries;  // one slot per state
};

/// One synchronous sweep of V'(x) = min_r1 max_r2 { c + discount(x)·E[V] }.
ValueFunction bellman_upper_step(const MarkovGame& game, const ValueFunction& v);
/// Mirror image, max_r2 min_r1.
ValueFunction bellman_lower_step(const MarkovGame& game, const ValueFunction& v);
/// Mixed-strategy sweep: V'(x) is the mixed value of the per-state matrix.
/// Serves both relaxed modes (their minimax orders coincide on mixed
/// strategies).
ValueFunction bellman_relaxed_step(const MarkovGame& game, const ValueFunction& v,
                                   double tol = 1e-9);

struct SolveOptions {
  double tol = 1e-9;
  long max_iter = 1000000;
  std::optional<ValueFunction> v0;  // default: all zeros
};

struct SolveResult {
  ValueFunction value;
  SolveReport report;
};

/// Value iteration to a sup-norm residual <= tol. Requires a contraction
/// certificate: max discount < 1, or absorption within |S| steps with
/// positive worst-case probability. Throws GameValidationError on an invalid
/// game and NotContractiveError when no certificate exists. Hitting max_iter
/// returns the best iterate with converged = false.
SolveResult solve(const MarkovGame& game, SolveMode mode, const SolveOptions& opts = {});

struct SaddleGap {
  double rho = 0.0;  // max_x (upper - lower)
  int argmax_state = 0;
  std::vector<double> per_state;
};

SaddleGap saddle_gap(const ValueFunction& upper, const ValueFunction& lower);

FeedbackPolicy extract_policies(const MarkovGame& game, const ValueFunction& v,
                                SolveMode mode, double tol = 1e-9);

/// Per-state Bellman matrix phi(x; r1, r2) = c(x,r1,r2) + discount(x)·E[v].
/// Exposed for diagnostics (convex-concavity probes of iterates).
CostMatrix bellman_matrix(const MarkovGame& game, const ValueFunction& v, int x);

}  // namespace zsg
