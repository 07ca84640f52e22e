#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "zsg/game.hpp"

namespace zsg {

/// Axis-aligned box domain.
struct Box {
  std::vector<double> lo, hi;
  int dim() const { return static_cast<int>(lo.size()); }
};

/// Scalar field tabulated on a lattice, evaluated by nearest-node lookup
/// (exact at the nodes it was sampled on).
struct TabulatedField {
  std::vector<double> origin;
  double h = 0.0;
  std::vector<int> shape;                   // points per axis
  std::vector<std::vector<double>> values;  // per regime, row-major over axes

  double eval(std::span<const double> x, int regime) const;
};

/// Scalar coefficient field f(x, regime) = c + sum_d l_d x_d + sum_d q_d x_d^2
/// with per-regime coefficients, or a tabulated override.
struct PolyField {
  std::vector<double> constant;             // per regime (empty = 0)
  std::vector<std::vector<double>> linear;  // [regime][coord] (empty = 0)
  std::vector<std::vector<double>> quad;    // [regime][coord] (empty = 0)
  std::optional<TabulatedField> table;

  double operator()(std::span<const double> x, int regime) const;
  bool is_zero() const;

  static PolyField zero() { return {}; }
  static PolyField constants(std::vector<double> per_regime);
};

/// Drift b(x, i, r1, r2) = r1 r2 b0 + r1 b1 + r2 b2 + b3 componentwise.
/// family Separable declares b0 == 0 (the (A6) form); Bilinear is the general
/// (A7) form.
struct DriftSpec {
  StructureKind family = StructureKind::Separable;
  std::vector<PolyField> b0, b1, b2, b3;  // one field per coordinate; empty vector = 0
};

/// Running cost k(x, i, r1, r2) =
///   p0 + p1 r1 + p2 r2 + p11 r1^2 + p22 r2^2 + p12 r1 r2.
struct ControlCostSpec {
  PolyField p0, p1, p2, p11, p22, p12;
};

/// Regime-switching controlled diffusion game on a box domain: dynamics
/// dx = b dt + sigma dw with regime generator Q, discounted exit-time cost.
struct DiffusionGameSpec {
  std::string name;
  int dim = 1;
  int num_regimes = 1;
  Box domain;
  ControlGrid u1, u2;
  double beta = 1.0;                  // discount rate, > 0
  std::vector<double> generator;      // Q, num_regimes^2 row-major
  std::vector<PolyField> covariance;  // A = sigma sigma', dim^2 row-major, symmetric
  DriftSpec drift;
  ControlCostSpec running_cost;
  PolyField terminal_cost;
  StructureKind structure = StructureKind::General;  // declared (A6)/(A7) tag

  double q(int i, int l) const { return generator[static_cast<size_t>(i) * num_regimes + l]; }

  void drift_at(std::span<const double> x, int regime, double r1, double r2,
                std::span<double> out) const;
  void covariance_at(std::span<const double> x, int regime, std::span<double> out) const;
  double running_cost_at(std::span<const double> x, int regime, double r1, double r2) const;
  double terminal_cost_at(std::span<const double> x, int regime) const;
  /// Largest |b_j| over both control grids at a point.
  double max_abs_drift(std::span<const double> x, int regime, int axis) const;

  /// Structural sanity (dims, generator rows, symmetry at box corners);
  /// returns human-readable problems, empty if none.
  std::vector<std::string> validate() const;
};

/// Uniform lattice over a box: spacing h per axis, points lo + k·h.
/// Points on the outermost index of any axis form the absorbing boundary.
struct LatticeSpec {
  Box box;
  double h = 0.0;
  std::vector<int> npts;

  static LatticeSpec build(const Box& box, double h);

  int dim() const { return box.dim(); }
  long num_points() const;
  void coords(long point, std::span<double> out) const;
  long index_shift(long point, int axis, int steps) const;  // neighbor point index
  bool is_boundary(long point) const;
  long nearest(std::span<const double> x) const;
};

/// Locally consistent discrete game on (lattice x regimes) built from a
/// DiffusionGameSpec by the central finite-difference scheme.
struct ChainApproximation {
  MarkovGame game;
  LatticeSpec lattice;
  int num_regimes = 1;
  double h = 0.0;
  double beta = 0.0;
  std::vector<double> dt;     // per state, h^2 / D^h
  std::vector<double> denom;  // per state, D^h

  int state_index(long point, int regime) const {
    return static_cast<int>(point * num_regimes + regime);
  }
  long point_of(int state) const { return state / num_regimes; }
  int regime_of(int state) const { return static_cast<int>(state % num_regimes); }
};

/// Largest mesh width keeping every axis probability nonnegative:
///   min over sampled (x, regime, axis) of
///     [a_jj - sum_{k != j} |a_jk|] / max_r |b_j(x, regime, r1, r2)|.
/// Axes with zero drift impose no restriction. Throws DegenerateDiffusionError
/// when the diagonal-dominance margin is <= 0 at a sampled point.
double max_h_bound(const DiffusionGameSpec& spec,
                   std::span<const std::vector<double>> sample_points);
double max_h_bound(const DiffusionGameSpec& spec, const LatticeSpec& lattice);

struct DominanceReport {
  bool ok = true;
  double worst_margin = 0.0;
  std::vector<double> worst_point;
  int worst_regime = 0;
  int worst_axis = 0;
};

DominanceReport diagonal_dominance_check(const DiffusionGameSpec& spec,
                                         const LatticeSpec& lattice);

/// Builds the chain at mesh h. Throws HTooLargeError when h exceeds the
/// admissible bound (negative probability would appear).
ChainApproximation build_chain(const DiffusionGameSpec& spec, double h);

struct ConsistencyReport {
  int samples = 0;
  double worst_mean_rel_defect = 0.0;    // |E[dx]/(b dt) - 1|, worst axis
  double worst_cov_defect = 0.0;         // |cov - A dt| / (h dt), worst entry
  double worst_regime_rel_defect = 0.0;  // |p_switch/(q dt) - 1|
  double max_step_over_h = 0.0;          // max |dx| / h, <= sqrt(2)
  double constant_c = 0.0;               // max(mean, regime defect) / h^2
  std::vector<double> worst_point;
  int worst_regime = 0;
};

/// Compares the chain's conditional moments with b·dt, A·dt and q·dt over all
/// interior states; controls subsampled to at most sample_controls pairs per
/// state (<= 0 means all). Throws ConsistencyViolationError when a relative
/// defect exceeds c_max·h^2.
ConsistencyReport check_local_consistency(const ChainApproximation& chain,
                                          const DiffusionGameSpec& spec,
                                          int sample_controls = 0,
                                          double c_max = 100.0);

}  // namespace zsg
