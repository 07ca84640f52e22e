#include "zsg/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "zsg/errors.hpp"
#include "zsg/parallel.hpp"

namespace zsg {

const char* to_string(SolveMode m) {
  switch (m) {
    case SolveMode::PureUpper: return "pure_upper";
    case SolveMode::PureLower: return "pure_lower";
    case SolveMode::RelaxedUpper: return "relaxed_upper";
    case SolveMode::RelaxedLower: return "relaxed_lower";
  }
  return "pure_upper";
}

std::optional<SolveMode> solve_mode_from_string(const std::string& s) {
  if (s == "pure_upper") return SolveMode::PureUpper;
  if (s == "pure_lower") return SolveMode::PureLower;
  if (s == "relaxed_upper") return SolveMode::RelaxedUpper;
  if (s == "relaxed_lower") return SolveMode::RelaxedLower;
  return std::nullopt;
}

namespace {

void fill_state_matrix(const MarkovGame& game, const ValueFunction& v, int x, CostMatrix& m) {
  const int n1 = game.n1(), n2 = game.n2();
  if (m.rows != n1 || m.cols != n2) m = CostMatrix(n1, n2);
  const double dx = game.discount[static_cast<size_t>(x)];
  for (int i = 0; i < n1; ++i) {
    for (int j = 0; j < n2; ++j) {
      double cont = 0.0;
      for (const Transition& t : game.kernel.row(x, i, j))
        cont += t.prob * v[static_cast<size_t>(t.target)];
      m(i, j) = game.costs.run(x, i, j) + dx * cont;
    }
  }
}

// How a sweep turns the per-state matrix into a scalar. The two relaxed
// envelopes bracket the mixed value by the LP duality defect and let the two
// relaxed solve modes be genuinely distinct computations.
enum class StepRule { PureUpper, PureLower, MixedCanonical, MixedUpperEnvelope, MixedLowerEnvelope };

double apply_rule(const CostMatrix& m, StepRule rule, double tol) {
  switch (rule) {
    case StepRule::PureUpper: return pure_upper_value(m);
    case StepRule::PureLower: return pure_lower_value(m);
    case StepRule::MixedCanonical: return mixed_value(m, tol).value;
    case StepRule::MixedUpperEnvelope: {
      const MixedSolution s = mixed_value(m, tol);
      return s.value + s.upper_defect;  // = max_j (mu1' C)_j
    }
    case StepRule::MixedLowerEnvelope: {
      const MixedSolution s = mixed_value(m, tol);
      return s.value - s.lower_defect;  // = min_i (C mu2)_i
    }
  }
  return 0.0;
}

ValueFunction sweep(const MarkovGame& game, const ValueFunction& v, StepRule rule, double tol) {
  const int n = game.n_states();
  ValueFunction next(static_cast<size_t>(n));
  parallel_for(n, [&](long begin, long end) {
    CostMatrix m;
    for (long x = begin; x < end; ++x) {
      if (game.space.is_absorbing(static_cast<int>(x))) {
        next[static_cast<size_t>(x)] = game.costs.terminal[static_cast<size_t>(x)];
        continue;
      }
      fill_state_matrix(game, v, static_cast<int>(x), m);
      next[static_cast<size_t>(x)] = apply_rule(m, rule, tol);
    }
  });
  return next;
}

StepRule rule_for(SolveMode mode) {
  switch (mode) {
    case SolveMode::PureUpper: return StepRule::PureUpper;
    case SolveMode::PureLower: return StepRule::PureLower;
    case SolveMode::RelaxedUpper: return StepRule::MixedUpperEnvelope;
    case SolveMode::RelaxedLower: return StepRule::MixedLowerEnvelope;
  }
  return StepRule::PureUpper;
}

// Worst-case survival weight over `horizon` steps: discount picked up at each
// visited state, mass lost to absorption. 1 - max_x beta_horizon(x) > 0
// certifies value iteration as a horizon-step contraction. Coincides with
// 1 - check_absorption() on undiscounted games.
double absorption_certificate(const MarkovGame& game, int horizon) {
  const int n = game.n_states();
  std::vector<double> beta(static_cast<size_t>(n)), next(static_cast<size_t>(n));
  for (int x = 0; x < n; ++x)
    beta[static_cast<size_t>(x)] = game.space.is_absorbing(x) ? 0.0 : 1.0;
  for (int k = 0; k < horizon; ++k) {
    for (int x = 0; x < n; ++x) {
      if (game.space.is_absorbing(x)) {
        next[static_cast<size_t>(x)] = 0.0;
        continue;
      }
      double worst = 0.0;
      for (int i = 0; i < game.n1(); ++i) {
        for (int j = 0; j < game.n2(); ++j) {
          double mass = 0.0;
          for (const Transition& t : game.kernel.row(x, i, j))
            mass += t.prob * beta[static_cast<size_t>(t.target)];
          worst = std::max(worst, mass);
        }
      }
      next[static_cast<size_t>(x)] = game.discount[static_cast<size_t>(x)] * worst;
    }
    beta.swap(next);
  }
  double worst = 0.0;
  for (int x = 0; x < n; ++x) worst = std::max(worst, beta[static_cast<size_t>(x)]);
  return 1.0 - worst;
}

}  // namespace

CostMatrix bellman_matrix(const MarkovGame& game, const ValueFunction& v, int x) {
  CostMatrix m;
  fill_state_matrix(game, v, x, m);
  return m;
}

ValueFunction bellman_upper_step(const MarkovGame& game, const ValueFunction& v) {
  return sweep(game, v, StepRule::PureUpper, 1e-9);
}

ValueFunction bellman_lower_step(const MarkovGame& game, const ValueFunction& v) {
  return sweep(game, v, StepRule::PureLower, 1e-9);
}

ValueFunction bellman_relaxed_step(const MarkovGame& game, const ValueFunction& v, double tol) {
  return sweep(game, v, StepRule::MixedCanonical, tol);
}

SolveResult solve(const MarkovGame& game, SolveMode mode, const SolveOptions& opts) {
  if (opts.tol <= 0.0) throw std::invalid_argument("solve: tol must be positive");
  {
    const auto violations = validate_game(game);
    if (!violations.empty()) {
      std::ostringstream os;
      os << "invalid game (" << violations.size() << " violation"
         << (violations.size() == 1 ? "" : "s") << "): " << violations.front().what;
      throw GameValidationError(os.str());
    }
  }

  const int n = game.n_states();
  SolveReport report;
  report.mode = mode;

  double max_discount = 0.0;
  for (double d : game.discount) max_discount = std::max(max_discount, d);
  if (max_discount < 1.0) {
    report.contraction_certificate = max_discount;
    report.certificate_route = "discount";
  } else {
    const double gamma = absorption_certificate(game, n);
    if (!(gamma > 0.0))
      throw NotContractiveError(
          "no contraction: some states are undiscounted and worst-case absorption "
          "probability over horizon " + std::to_string(n) + " is zero");
    report.contraction_certificate = gamma;
    report.certificate_route = "absorption";
  }

  ValueFunction v = opts.v0 ? *opts.v0 : ValueFunction(static_cast<size_t>(n), 0.0);
  if (v.size() != static_cast<size_t>(n))
    throw std::invalid_argument("solve: v0 size does not match the state space");

  const StepRule rule = rule_for(mode);
  for (long it = 1; it <= opts.max_iter; ++it) {
    ValueFunction next = sweep(game, v, rule, opts.tol);
    double residual = 0.0;
    for (size_t x = 0; x < v.size(); ++x)
      residual = std::max(residual, std::abs(next[x] - v[x]));
    v = std::move(next);
    report.iterations = it;
    report.final_residual = residual;
    if (residual <= opts.tol) {
      report.converged = true;
      break;
    }
  }
  return {std::move(v), report};
}

SaddleGap saddle_gap(const ValueFunction& upper, const ValueFunction& lower) {
  if (upper.size() != lower.size())
    throw MismatchedStateSpacesError("saddle_gap: value functions differ in size");
  SaddleGap gap;
  gap.per_state.resize(upper.size());
  gap.rho = -std::numeric_limits<double>::infinity();
  for (size_t x = 0; x < upper.size(); ++x) {
    gap.per_state[x] = upper[x] - lower[x];
    if (gap.per_state[x] > gap.rho) {
      gap.rho = gap.per_state[x];
      gap.argmax_state = static_cast<int>(x);
    }
  }
  if (upper.empty()) gap.rho = 0.0;
  return gap;
}

FeedbackPolicy extract_policies(const MarkovGame& game, const ValueFunction& v,
                                SolveMode mode, double tol) {
  const int n = game.n_states();
  FeedbackPolicy policy;
  policy.entries.resize(static_cast<size_t>(n));
  parallel_for(n, [&](long begin, long end) {
    CostMatrix m;
    for (long xs = begin; xs < end; ++xs) {
      const int x = static_cast<int>(xs);
      if (game.space.is_absorbing(x)) continue;
      fill_state_matrix(game, v, x, m);
      PolicyEntry e;
      if (!is_relaxed(mode)) {
        if (mode == SolveMode::PureUpper) {
          // minimizer commits, maximizer best-responds
          pure_upper_value(m, &e.r1, &e.r2);
        } else {
          pure_lower_value(m, &e.r2, &e.r1);
        }
      } else {
        int si = 0, sj = 0;
        const double up = pure_upper_value(m, &si);
        const double lo = pure_lower_value(m, &sj);
        if (up == lo) {
          e.r1 = si;
          e.r2 = sj;
        } else {
          const MixedSolution s = mixed_value(m, tol);
          e.mixed = true;
          e.mu1 = s.strategy1;
          e.mu2 = s.strategy2;
        }
      }
      policy.entries[static_cast<size_t>(x)] = std::move(e);
    }
  });
  return policy;
}

}  // namespace zsg
