#include "zsg/matrix_game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace zsg {

CostMatrix::CostMatrix(std::initializer_list<std::initializer_list<double>> init) {
  rows = static_cast<int>(init.size());
  cols = rows == 0 ? 0 : static_cast<int>(init.begin()->size());
  a.reserve(static_cast<size_t>(rows) * cols);
  for (const auto& r : init) {
    if (static_cast<int>(r.size()) != cols)
      throw std::invalid_argument("CostMatrix: ragged initializer");
    a.insert(a.end(), r.begin(), r.end());
  }
}

bool CostMatrix::finite() const {
  return std::all_of(a.begin(), a.end(), [](double v) { return std::isfinite(v); });
}

std::string format_matrix(const CostMatrix& c) {
  std::ostringstream os;
  for (int i = 0; i < c.rows; ++i) {
    os << (i == 0 ? "[" : " ");
    for (int j = 0; j < c.cols; ++j) os << (j ? " " : "[") << c(i, j);
    os << "]" << (i + 1 == c.rows ? "]" : "\n");
  }
  return os.str();
}

double pure_upper_value(const CostMatrix& c, int* row, int* col) {
  double best = std::numeric_limits<double>::infinity();
  int best_i = 0, best_j = 0;
  for (int i = 0; i < c.rows; ++i) {
    double row_max = -std::numeric_limits<double>::infinity();
    int row_j = 0;
    for (int j = 0; j < c.cols; ++j) {
      if (c(i, j) > row_max) {
        row_max = c(i, j);
        row_j = j;
      }
    }
    if (row_max < best) {
      best = row_max;
      best_i = i;
      best_j = row_j;
    }
  }
  if (row) *row = best_i;
  if (col) *col = best_j;
  return best;
}

double pure_lower_value(const CostMatrix& c, int* col, int* row) {
  double best = -std::numeric_limits<double>::infinity();
  int best_j = 0, best_i = 0;
  for (int j = 0; j < c.cols; ++j) {
    double col_min = std::numeric_limits<double>::infinity();
    int col_i = 0;
    for (int i = 0; i < c.rows; ++i) {
      if (c(i, j) < col_min) {
        col_min = c(i, j);
        col_i = i;
      }
    }
    if (col_min > best) {
      best = col_min;
      best_j = j;
      best_i = col_i;
    }
  }
  if (col) *col = best_j;
  if (row) *row = best_i;
  return best;
}

PureUpperSolution pure_upper(const CostMatrix& c) {
  PureUpperSolution s;
  s.argmax_col_per_row.resize(c.rows, 0);
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < c.rows; ++i) {
    double row_max = -std::numeric_limits<double>::infinity();
    int row_j = 0;
    for (int j = 0; j < c.cols; ++j) {
      if (c(i, j) > row_max) {
        row_max = c(i, j);
        row_j = j;
      }
    }
    s.argmax_col_per_row[i] = row_j;
    if (row_max < best) {
      best = row_max;
      s.argmin_row = i;
    }
  }
  s.value = best;
  return s;
}

PureLowerSolution pure_lower(const CostMatrix& c) {
  PureLowerSolution s;
  s.value = pure_lower_value(c, &s.argmax_col);
  return s;
}

double best_response_to_row_mix(const CostMatrix& c, const std::vector<double>& mu1) {
  double best = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < c.cols; ++j) {
    double v = 0.0;
    for (int i = 0; i < c.rows; ++i) v += mu1[i] * c(i, j);
    best = std::max(best, v);
  }
  return best;
}

double best_response_to_col_mix(const CostMatrix& c, const std::vector<double>& mu2) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < c.rows; ++i) {
    double v = 0.0;
    for (int j = 0; j < c.cols; ++j) v += mu2[j] * c(i, j);
    best = std::min(best, v);
  }
  return best;
}

namespace {

// Primal simplex workspace for the row player's game LP
//   max 1'x  s.t.  (C + shift)' x <= 1,  x >= 0,
// where x is proportional to mu1 and the constraint for column j caps the
// shifted payoff of every pure response. At the optimum 1'x = 1/value' and
// the duals under the slack columns are proportional to mu2. The slack basis
// is feasible and the feasible set is bounded, so no phase 1 and no unbounded
// exit. Reused across calls to avoid allocation in Bellman sweeps.
struct SimplexWorkspace {
  std::vector<double> t;   // (m+1) x (n+m+1) tableau, row-major
  std::vector<int> basis;  // basic variable per constraint row
  int m = 0, n = 0, width = 0;  // m constraints (C columns), n variables (C rows)

  double& at(int i, int j) { return t[static_cast<size_t>(i) * width + j]; }

  void init(const CostMatrix& c, double shift) {
    m = c.cols;
    n = c.rows;
    width = n + m + 1;
    t.assign(static_cast<size_t>(m + 1) * width, 0.0);
    basis.resize(m);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) at(i, j) = c(j, i) + shift;
      at(i, n + i) = 1.0;
      at(i, width - 1) = 1.0;
      basis[i] = n + i;
    }
    for (int j = 0; j < n; ++j) at(m, j) = -1.0;  // maximize sum(x)
  }

  void pivot(int pr, int pc) {
    const double piv = at(pr, pc);
    for (int j = 0; j < width; ++j) at(pr, j) /= piv;
    at(pr, pc) = 1.0;
    for (int i = 0; i <= m; ++i) {
      if (i == pr) continue;
      const double f = at(i, pc);
      if (f == 0.0) continue;
      for (int j = 0; j < width; ++j) at(i, j) -= f * at(pr, j);
      at(i, pc) = 0.0;
    }
    basis[pr] = pc;
  }

  // Entering column: most negative reduced cost (lowest index on ties), or
  // lowest-index negative when bland is set. Returns -1 at optimality.
  int entering(bool bland) const {
    const double eps = 1e-11;
    int best = -1;
    double best_val = -eps;
    for (int j = 0; j < width - 1; ++j) {
      const double rc = t[static_cast<size_t>(m) * width + j];
      if (bland) {
        if (rc < -eps) return j;
      } else if (rc < best_val) {
        best_val = rc;
        best = j;
      }
    }
    return best;
  }

  // Leaving row by minimum ratio, ties to the lowest basis index.
  int leaving(int pc) const {
    const double eps = 1e-11;
    int row = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) {
      const double col = t[static_cast<size_t>(i) * width + pc];
      if (col <= eps) continue;
      const double ratio = t[static_cast<size_t>(i) * width + (width - 1)] / col;
      if (ratio < best_ratio - eps ||
          (ratio < best_ratio + eps && (row < 0 || basis[i] < basis[row]))) {
        best_ratio = std::min(best_ratio, ratio);
        row = i;
      }
    }
    return row;
  }

  // Runs to optimality; returns false if the pivot budget was exhausted.
  bool run(bool bland, long budget) {
    for (long k = 0; k < budget; ++k) {
      const int pc = entering(bland);
      if (pc < 0) return true;
      const int pr = leaving(pc);
      if (pr < 0) throw std::logic_error("matrix game LP unbounded");
      pivot(pr, pc);
    }
    return false;
  }
};

thread_local SimplexWorkspace tls_simplex;

MixedSolution pure_point_solution(const CostMatrix& c, double value, int i, int j) {
  MixedSolution s;
  s.value = value;
  s.strategy1.assign(c.rows, 0.0);
  s.strategy2.assign(c.cols, 0.0);
  s.strategy1[i] = 1.0;
  s.strategy2[j] = 1.0;
  s.upper_defect = best_response_to_row_mix(c, s.strategy1) - s.value;
  s.lower_defect = s.value - best_response_to_col_mix(c, s.strategy2);
  return s;
}

void clamp_normalize(std::vector<double>& mu) {
  double sum = 0.0;
  for (double& p : mu) {
    if (p < 0.0) p = 0.0;
    sum += p;
  }
  if (sum > 0.0)
    for (double& p : mu) p /= sum;
}

}  // namespace

MixedSolution mixed_value(const CostMatrix& c, double tol) {
  if (c.rows < 1 || c.cols < 1) throw std::invalid_argument("mixed_value: empty matrix");
  if (!c.finite()) throw std::invalid_argument("mixed_value: non-finite entry");

  // Single-row / single-column games reduce to a scan.
  if (c.rows == 1) {
    int j = 0;
    double v = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < c.cols; ++k)
      if (c(0, k) > v) {
        v = c(0, k);
        j = k;
      }
    return pure_point_solution(c, v, 0, j);
  }
  if (c.cols == 1) {
    int i = 0;
    double v = std::numeric_limits<double>::infinity();
    for (int k = 0; k < c.rows; ++k)
      if (c(k, 0) < v) {
        v = c(k, 0);
        i = k;
      }
    return pure_point_solution(c, v, i, 0);
  }

  // Pure saddle point: min-max equals max-min, both are entries of c, so the
  // comparison is exact and the mixed value equals the common value.
  int up_i = 0, lo_j = 0;
  const double up = pure_upper_value(c, &up_i);
  const double lo = pure_lower_value(c, &lo_j);
  if (up == lo) return pure_point_solution(c, up, up_i, lo_j);

  const double min_entry = *std::min_element(c.a.begin(), c.a.end());
  const double shift = 1.0 - min_entry;  // entries >= 1 after shifting

  auto& ws = tls_simplex;
  auto extract = [&]() {
    MixedSolution s;
    s.strategy1.assign(c.rows, 0.0);
    for (int i = 0; i < ws.m; ++i)
      if (ws.basis[i] < ws.n) s.strategy1[ws.basis[i]] = ws.at(i, ws.width - 1);
    s.strategy2.assign(c.cols, 0.0);
    for (int i = 0; i < ws.m; ++i) s.strategy2[i] = ws.at(ws.m, ws.n + i);  // duals
    double sum_x = 0.0;
    for (double x : s.strategy1) sum_x += std::max(x, 0.0);
    if (sum_x <= 0.0) throw std::logic_error("matrix game LP: degenerate optimum");
    s.value = 1.0 / sum_x - shift;
    clamp_normalize(s.strategy1);
    clamp_normalize(s.strategy2);
    s.upper_defect = best_response_to_row_mix(c, s.strategy1) - s.value;
    s.lower_defect = s.value - best_response_to_col_mix(c, s.strategy2);
    return s;
  };

  ws.init(c, shift);
  const long budget = 2000 + 50L * (c.rows + c.cols);
  if (!ws.run(/*bland=*/false, budget)) {
    ws.init(c, shift);  // Dantzig cycled; Bland's rule terminates
    ws.run(/*bland=*/true, 100000);
  }
  MixedSolution s = extract();

  // The simplex terminates at an exact vertex; defects beyond tol indicate a
  // numerically degenerate pivot sequence. One Bland restart is the fallback.
  if (s.upper_defect > tol || s.lower_defect > tol) {
    ws.init(c, shift);
    ws.run(/*bland=*/true, 100000);
    const MixedSolution r = extract();
    if (std::max(r.upper_defect, r.lower_defect) < std::max(s.upper_defect, s.lower_defect))
      s = r;
  }
  return s;
}

}  // namespace zsg
