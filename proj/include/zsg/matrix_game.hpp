#pragma once

#include <initializer_list>
#include <string>
#include <vector>

namespace zsg {

/// A static two-player zero-sum game on finite action sets.
/// entry(i, j) is the cost paid by player 1 (the minimizer, picking rows)
/// to player 2 (the maximizer, picking columns).
struct CostMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;  // row-major, rows*cols entries

  CostMatrix() = default;
  CostMatrix(int m, int n) : rows(m), cols(n), a(static_cast<size_t>(m) * n, 0.0) {}
  CostMatrix(std::initializer_list<std::initializer_list<double>> init);

  double operator()(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }
  double& operator()(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }

  bool finite() const;
};

std::string format_matrix(const CostMatrix& c);

struct PureUpperSolution {
  double value = 0.0;               // min_i max_j c(i,j)
  int argmin_row = 0;               // lowest-index minimizing row
  std::vector<int> argmax_col_per_row;  // lowest-index maximizing column of each row
};

struct PureLowerSolution {
  double value = 0.0;  // max_j min_i c(i,j)
  int argmax_col = 0;  // lowest-index maximizing column
};

PureUpperSolution pure_upper(const CostMatrix& c);
PureLowerSolution pure_lower(const CostMatrix& c);

// Allocation-free variants for hot loops. Optional out-params receive the
// optimizing row/column (lowest index on ties).
double pure_upper_value(const CostMatrix& c, int* row = nullptr, int* col = nullptr);
double pure_lower_value(const CostMatrix& c, int* col = nullptr, int* row = nullptr);

/// Mixed-strategy (relaxed) solution of a matrix game with an explicit
/// optimality certificate. The defects replay the strategies against every
/// pure response:
///   upper_defect = max_j (mu1' C)_j - value
///   lower_defect = value - min_i (C mu2)_i
/// Both are <= tol at an optimal pair.
struct MixedSolution {
  double value = 0.0;
  std::vector<double> strategy1;  // mu1, length rows
  std::vector<double> strategy2;  // mu2, length cols
  double upper_defect = 0.0;
  double lower_defect = 0.0;
};

/// Value and epsilon-optimal strategies of the matrix game. Pure saddle
/// points and 1xn / mx1 games are resolved by direct scan; everything else
/// goes through a primal simplex on the standard game LP (entries shifted
/// positive, value shifted back). Throws std::invalid_argument on non-finite
/// entries; deterministic for fixed input.
MixedSolution mixed_value(const CostMatrix& c, double tol = 1e-9);

// Best pure responses to a fixed mixed strategy; used for certificates and
// the relaxed Bellman envelopes.
double best_response_to_row_mix(const CostMatrix& c, const std::vector<double>& mu1);  // max_j mu1'C
double best_response_to_col_mix(const CostMatrix& c, const std::vector<double>& mu2);  // min_i C mu2

}  // namespace zsg
