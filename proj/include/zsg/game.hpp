#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace zsg {

/// Finite state space with a designated set of absorbing states.
struct StateSpace {
  std::vector<std::string> names;
  std::vector<std::uint8_t> absorbing;  // mask, same length as names

  int size() const { return static_cast<int>(names.size()); }
  bool is_absorbing(int x) const { return absorbing[static_cast<size_t>(x)] != 0; }
  /// Index of a named state, -1 if absent.
  int index_of(const std::string& name) const;
};

/// Uniform finite grid over a compact control interval [lo, hi].
/// A single-point grid collapses to lo.
struct ControlGrid {
  double lo = 0.0;
  double hi = 0.0;
  int n_points = 1;

  int size() const { return n_points; }
  double point(int k) const {
    if (n_points == 1) return lo;
    if (k == n_points - 1) return hi;  // endpoints exact
    return lo + k * (hi - lo) / (n_points - 1);
  }
  std::vector<double> points() const;
};

struct Transition {
  int target = 0;
  double prob = 0.0;
};

/// p(x, y | r1, r2): one sparse probability row per (state, control pair).
class TransitionKernel {
 public:
  TransitionKernel() = default;
  TransitionKernel(int n_states, int n1, int n2)
      : n_states_(n_states), n1_(n1), n2_(n2),
        rows_(static_cast<size_t>(n_states) * n1 * n2) {}

  int n_states() const { return n_states_; }
  int n1() const { return n1_; }
  int n2() const { return n2_; }

  std::span<const Transition> row(int x, int r1, int r2) const {
    return rows_[idx(x, r1, r2)];
  }
  void set_row(int x, int r1, int r2, std::vector<Transition> row) {
    rows_[idx(x, r1, r2)] = std::move(row);
  }
  /// Same distribution for every control pair of state x.
  void set_row_all_controls(int x, const std::vector<Transition>& row);

 private:
  size_t idx(int x, int r1, int r2) const {
    return (static_cast<size_t>(x) * n1_ + r1) * n2_ + r2;
  }
  int n_states_ = 0, n1_ = 0, n2_ = 0;
  std::vector<std::vector<Transition>> rows_;
};

/// Running cost c(x, r1, r2) and terminal cost g(x), dense tables.
struct CostModel {
  int n_states = 0, n1 = 0, n2 = 0;
  std::vector<double> running;   // n_states*n1*n2, row-major (x, r1, r2)
  std::vector<double> terminal;  // n_states

  CostModel() = default;
  CostModel(int ns, int m1, int m2)
      : n_states(ns), n1(m1), n2(m2),
        running(static_cast<size_t>(ns) * m1 * m2, 0.0),
        terminal(static_cast<size_t>(ns), 0.0) {}

  double run(int x, int r1, int r2) const {
    return running[(static_cast<size_t>(x) * n1 + r1) * n2 + r2];
  }
  double& run(int x, int r1, int r2) {
    return running[(static_cast<size_t>(x) * n1 + r1) * n2 + r2];
  }
};

enum class StructureKind { General, Separable, Bilinear };

const char* to_string(StructureKind k);

/// Declared structural form of costs (and, for approximating chains, drift).
/// Separable may carry explicit additive parts c1(x, r1), c2(x, r2); when the
/// parts are absent the decomposition is verified through cross differences.
struct StructureTag {
  StructureKind kind = StructureKind::General;
  std::vector<double> part1;  // n_states*n1, optional
  std::vector<double> part2;  // n_states*n2, optional
};

/// Finite-state, finite-control-grid zero-sum Markov game. Player 1 picks
/// from grid1 and minimizes, player 2 picks from grid2 and maximizes.
/// discount[x] multiplies the expected continuation value at x.
struct MarkovGame {
  StateSpace space;
  ControlGrid grid1, grid2;
  TransitionKernel kernel;
  CostModel costs;
  std::vector<double> discount;  // per state, in (0, 1]
  StructureTag structure;

  int n_states() const { return space.size(); }
  int n1() const { return grid1.size(); }
  int n2() const { return grid2.size(); }

  /// Sized game with zero costs, discount 1 everywhere, absorbing rows
  /// pre-filled as self-loops, all other kernel rows empty.
  static MarkovGame create(StateSpace space, ControlGrid g1, ControlGrid g2);
};

struct Violation {
  std::string what;
  int state = -1;
  int r1 = -1;
  int r2 = -1;
};

/// Checks every structural invariant of the model and reports all failures:
/// nonempty unique states, well-formed grids, kernel rows that are probability
/// distributions (sum 1 within 1e-12), absorbing self-loops, finite costs,
/// discounts in (0,1], at least one absorbing state when fully undiscounted,
/// and consistency of a declared Separable/Bilinear structure tag.
std::vector<Violation> validate_game(const MarkovGame& game);

struct ConvexConcaveReport {
  bool convex_in_r1 = true;
  bool concave_in_r2 = true;
  double worst_violation = 0.0;  // largest signed midpoint defect, <= 0 when satisfied
};

/// Discrete midpoint probe of convex-concavity on a uniform grid table
/// (row index = r1, column index = r2). Directions with fewer than three
/// points are vacuously accepted. Tolerance 1e-12.
ConvexConcaveReport probe_convex_concave(std::span<const double> f, int m, int n);

/// Worst-case probability of hitting the absorbing set within `horizon` steps:
///   P_0 = 1 on absorbing states, else 0;
///   P_{k+1}(x) = min over (r1, r2) of sum_y p(x,y|r1,r2) P_k(y), P fixed at 1 on absorbing.
/// Returns min over non-absorbing x of P_horizon(x); 1 if every state absorbs.
/// horizon <= 0 selects the default |S|.
double check_absorption(const MarkovGame& game, int horizon = 0);

}  // namespace zsg
