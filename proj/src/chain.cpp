#include "zsg/chain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "zsg/errors.hpp"
#include "zsg/parallel.hpp"

namespace zsg {

double TabulatedField::eval(std::span<const double> x, int regime) const {
  long flat = 0;
  for (size_t d = 0; d < origin.size(); ++d) {
    long idx = std::lround(std::floor((x[d] - origin[d]) / h + 0.5));
    idx = std::clamp<long>(idx, 0, shape[d] - 1);
    flat = flat * shape[d] + idx;
  }
  return values[static_cast<size_t>(regime)][static_cast<size_t>(flat)];
}

double PolyField::operator()(std::span<const double> x, int regime) const {
  if (table) return table->eval(x, regime);
  const auto r = static_cast<size_t>(regime);
  double v = r < constant.size() ? constant[r] : 0.0;
  if (r < linear.size())
    for (size_t d = 0; d < linear[r].size() && d < x.size(); ++d) v += linear[r][d] * x[d];
  if (r < quad.size())
    for (size_t d = 0; d < quad[r].size() && d < x.size(); ++d) v += quad[r][d] * x[d] * x[d];
  return v;
}

bool PolyField::is_zero() const {
  if (table) return false;
  auto all0 = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double c) { return c == 0.0; });
  };
  if (!all0(constant)) return false;
  for (const auto& v : linear)
    if (!all0(v)) return false;
  for (const auto& v : quad)
    if (!all0(v)) return false;
  return true;
}

PolyField PolyField::constants(std::vector<double> per_regime) {
  PolyField f;
  f.constant = std::move(per_regime);
  return f;
}

void DiffusionGameSpec::drift_at(std::span<const double> x, int regime, double r1, double r2,
                                 std::span<double> out) const {
  for (int d = 0; d < dim; ++d) {
    double v = 0.0;
    const auto sd = static_cast<size_t>(d);
    if (sd < drift.b0.size()) v += r1 * r2 * drift.b0[sd](x, regime);
    if (sd < drift.b1.size()) v += r1 * drift.b1[sd](x, regime);
    if (sd < drift.b2.size()) v += r2 * drift.b2[sd](x, regime);
    if (sd < drift.b3.size()) v += drift.b3[sd](x, regime);
    out[sd] = v;
  }
}

void DiffusionGameSpec::covariance_at(std::span<const double> x, int regime,
                                      std::span<double> out) const {
  for (int j = 0; j < dim * dim; ++j)
    out[static_cast<size_t>(j)] = covariance[static_cast<size_t>(j)](x, regime);
}

double DiffusionGameSpec::running_cost_at(std::span<const double> x, int regime, double r1,
                                          double r2) const {
  const auto& k = running_cost;
  return k.p0(x, regime) + k.p1(x, regime) * r1 + k.p2(x, regime) * r2 +
         k.p11(x, regime) * r1 * r1 + k.p22(x, regime) * r2 * r2 +
         k.p12(x, regime) * r1 * r2;
}

double DiffusionGameSpec::terminal_cost_at(std::span<const double> x, int regime) const {
  return terminal_cost(x, regime);
}

double DiffusionGameSpec::max_abs_drift(std::span<const double> x, int regime, int axis) const {
  double worst = 0.0;
  std::vector<double> b(static_cast<size_t>(dim));
  for (int i = 0; i < u1.size(); ++i) {
    for (int j = 0; j < u2.size(); ++j) {
      drift_at(x, regime, u1.point(i), u2.point(j), b);
      worst = std::max(worst, std::abs(b[static_cast<size_t>(axis)]));
    }
  }
  return worst;
}

std::vector<std::string> DiffusionGameSpec::validate() const {
  std::vector<std::string> out;
  if (dim < 1) out.push_back("dim must be >= 1");
  if (num_regimes < 1) out.push_back("num_regimes must be >= 1");
  if (!(beta > 0.0)) out.push_back("beta must be > 0");
  if (domain.dim() != dim || static_cast<int>(domain.hi.size()) != dim)
    out.push_back("domain dimensions do not match dim");
  else
    for (int d = 0; d < dim; ++d)
      if (!(domain.lo[static_cast<size_t>(d)] < domain.hi[static_cast<size_t>(d)]))
        out.push_back("domain axis " + std::to_string(d) + " has lo >= hi");
  if (u1.n_points < 1 || u2.n_points < 1 || u1.lo > u1.hi || u2.lo > u2.hi)
    out.push_back("control grids are malformed");
  if (static_cast<int>(generator.size()) != num_regimes * num_regimes) {
    out.push_back("generator must be num_regimes^2 entries");
  } else {
    for (int i = 0; i < num_regimes; ++i) {
      double row_sum = 0.0;
      for (int l = 0; l < num_regimes; ++l) {
        row_sum += q(i, l);
        if (i != l && q(i, l) < -1e-15)
          out.push_back("generator off-diagonal q(" + std::to_string(i) + "," +
                        std::to_string(l) + ") is negative");
      }
      if (std::abs(row_sum) > 1e-12)
        out.push_back("generator row " + std::to_string(i) + " sums to " +
                      std::to_string(row_sum));
    }
  }
  if (static_cast<int>(covariance.size()) != dim * dim) {
    out.push_back("covariance must be dim^2 fields");
  } else if (domain.dim() == dim) {
    // symmetry spot check at box corners and center
    std::vector<double> x(static_cast<size_t>(dim));
    std::vector<double> a(static_cast<size_t>(dim) * dim);
    for (int corner = 0; corner <= (1 << dim); ++corner) {
      for (int d = 0; d < dim; ++d) {
        const auto sd = static_cast<size_t>(d);
        x[sd] = corner == (1 << dim)
                    ? 0.5 * (domain.lo[sd] + domain.hi[sd])
                    : ((corner >> d) & 1 ? domain.hi[sd] : domain.lo[sd]);
      }
      for (int r = 0; r < num_regimes; ++r) {
        covariance_at(x, r, a);
        for (int j = 0; j < dim; ++j)
          for (int k = j + 1; k < dim; ++k)
            if (std::abs(a[static_cast<size_t>(j) * dim + k] -
                         a[static_cast<size_t>(k) * dim + j]) > 1e-12) {
              out.push_back("covariance is not symmetric at a sampled point");
              j = k = dim;
            }
      }
    }
  }
  if (drift.family != StructureKind::Separable && drift.family != StructureKind::Bilinear)
    out.push_back("drift family must be separable or bilinear");
  if (drift.family == StructureKind::Separable)
    for (const auto& f : drift.b0)
      if (!f.is_zero()) out.push_back("separable drift declares a nonzero b0 term");
  for (const auto* fields : {&drift.b0, &drift.b1, &drift.b2, &drift.b3})
    if (!fields->empty() && static_cast<int>(fields->size()) != dim)
      out.push_back("drift coefficient vector has wrong dimension");
  return out;
}

LatticeSpec LatticeSpec::build(const Box& box, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("lattice: h must be positive");
  LatticeSpec lat;
  lat.box = box;
  lat.h = h;
  lat.npts.resize(static_cast<size_t>(box.dim()));
  for (int d = 0; d < box.dim(); ++d) {
    const auto sd = static_cast<size_t>(d);
    const double span = box.hi[sd] - box.lo[sd];
    lat.npts[sd] = static_cast<int>(std::floor(span / h + 1e-9)) + 1;
  }
  return lat;
}

long LatticeSpec::num_points() const {
  long n = 1;
  for (int c : npts) n *= c;
  return n;
}

void LatticeSpec::coords(long point, std::span<double> out) const {
  for (int d = dim() - 1; d >= 0; --d) {
    const auto sd = static_cast<size_t>(d);
    out[sd] = box.lo[sd] + static_cast<double>(point % npts[sd]) * h;
    point /= npts[sd];
  }
}

long LatticeSpec::index_shift(long point, int axis, int steps) const {
  long stride = 1;
  for (int d = dim() - 1; d > axis; --d) stride *= npts[static_cast<size_t>(d)];
  return point + steps * stride;
}

bool LatticeSpec::is_boundary(long point) const {
  for (int d = dim() - 1; d >= 0; --d) {
    const int nd = npts[static_cast<size_t>(d)];
    const long idx = point % nd;
    if (idx == 0 || idx == nd - 1) return true;
    point /= nd;
  }
  return false;
}

long LatticeSpec::nearest(std::span<const double> x) const {
  long flat = 0;
  for (int d = 0; d < dim(); ++d) {
    const auto sd = static_cast<size_t>(d);
    long idx = std::lround(std::floor((x[sd] - box.lo[sd]) / h + 0.5));
    idx = std::clamp<long>(idx, 0, npts[sd] - 1);
    flat = flat * npts[sd] + idx;
  }
  return flat;
}

namespace {

double dominance_margin(std::span<const double> a, int dim, int axis) {
  double m = a[static_cast<size_t>(axis) * dim + axis];
  for (int k = 0; k < dim; ++k)
    if (k != axis) m -= std::abs(a[static_cast<size_t>(axis) * dim + k]);
  return m;
}

std::string point_label(std::span<const double> x) {
  std::string s = "(";
  char buf[32];
  for (size_t d = 0; d < x.size(); ++d) {
    std::snprintf(buf, sizeof buf, "%g", x[d]);
    s += (d ? "," : "") + std::string(buf);
  }
  return s + ")";
}

}  // namespace

double max_h_bound(const DiffusionGameSpec& spec,
                   std::span<const std::vector<double>> sample_points) {
  double bound = std::numeric_limits<double>::infinity();
  std::vector<double> a(static_cast<size_t>(spec.dim) * spec.dim);
  for (const auto& x : sample_points) {
    for (int r = 0; r < spec.num_regimes; ++r) {
      spec.covariance_at(x, r, a);
      for (int d = 0; d < spec.dim; ++d) {
        const double margin = dominance_margin(a, spec.dim, d);
        if (margin <= 0.0)
          throw DegenerateDiffusionError("diagonal dominance margin " +
                                         std::to_string(margin) + " at " + point_label(x) +
                                         " regime " + std::to_string(r));
        const double worst_b = spec.max_abs_drift(x, r, d);
        if (worst_b > 0.0) bound = std::min(bound, margin / worst_b);
      }
    }
  }
  return bound;
}

double max_h_bound(const DiffusionGameSpec& spec, const LatticeSpec& lattice) {
  std::vector<std::vector<double>> pts;
  pts.reserve(static_cast<size_t>(lattice.num_points()));
  for (long p = 0; p < lattice.num_points(); ++p) {
    std::vector<double> x(static_cast<size_t>(lattice.dim()));
    lattice.coords(p, x);
    pts.push_back(std::move(x));
  }
  return max_h_bound(spec, pts);
}

DominanceReport diagonal_dominance_check(const DiffusionGameSpec& spec,
                                         const LatticeSpec& lattice) {
  DominanceReport rep;
  rep.worst_margin = std::numeric_limits<double>::infinity();
  std::vector<double> x(static_cast<size_t>(spec.dim));
  std::vector<double> a(static_cast<size_t>(spec.dim) * spec.dim);
  for (long p = 0; p < lattice.num_points(); ++p) {
    lattice.coords(p, x);
    for (int r = 0; r < spec.num_regimes; ++r) {
      spec.covariance_at(x, r, a);
      for (int d = 0; d < spec.dim; ++d) {
        const double margin = dominance_margin(a, spec.dim, d);
        if (margin < rep.worst_margin) {
          rep.worst_margin = margin;
          rep.worst_point = x;
          rep.worst_regime = r;
          rep.worst_axis = d;
        }
      }
    }
  }
  rep.ok = rep.worst_margin > 0.0;
  return rep;
}

ChainApproximation build_chain(const DiffusionGameSpec& spec, double h) {
  {
    const auto problems = spec.validate();
    if (!problems.empty())
      throw std::invalid_argument("diffusion spec: " + problems.front());
  }
  ChainApproximation chain;
  chain.lattice = LatticeSpec::build(spec.domain, h);
  chain.num_regimes = spec.num_regimes;
  chain.h = h;
  chain.beta = spec.beta;

  {
    const double bound = max_h_bound(spec, chain.lattice);
    if (h > bound) throw HTooLargeError(h, bound);
  }

  const long npoints = chain.lattice.num_points();
  const int m0 = spec.num_regimes;
  const long n_states = npoints * m0;
  const int dim = spec.dim;

  StateSpace space;
  space.names.resize(static_cast<size_t>(n_states));
  space.absorbing.resize(static_cast<size_t>(n_states), 0);
  {
    std::vector<double> x(static_cast<size_t>(dim));
    char buf[64];
    for (long p = 0; p < npoints; ++p) {
      chain.lattice.coords(p, x);
      const bool boundary = chain.lattice.is_boundary(p);
      std::string label = point_label(x);
      for (int r = 0; r < m0; ++r) {
        const long s = p * m0 + r;
        std::snprintf(buf, sizeof buf, "#%d", r);
        space.names[static_cast<size_t>(s)] = label + buf;
        space.absorbing[static_cast<size_t>(s)] = boundary ? 1 : 0;
      }
    }
  }

  MarkovGame game = MarkovGame::create(std::move(space), spec.u1, spec.u2);
  game.structure.kind = spec.structure;

  chain.dt.assign(static_cast<size_t>(n_states), 0.0);
  chain.denom.assign(static_cast<size_t>(n_states), 0.0);

  const int n1 = spec.u1.size(), n2 = spec.u2.size();
  const bool separable_cost =
      spec.structure == StructureKind::Separable && spec.running_cost.p12.is_zero();
  if (separable_cost) {
    game.structure.part1.assign(static_cast<size_t>(n_states) * n1, 0.0);
    game.structure.part2.assign(static_cast<size_t>(n_states) * n2, 0.0);
  }

  double h_bound_on_failure = -1.0;  // computed lazily for the error message

  std::vector<double> x(static_cast<size_t>(dim));
  std::vector<double> a(static_cast<size_t>(dim) * dim);
  std::vector<double> b(static_cast<size_t>(dim));
  std::vector<double> margin(static_cast<size_t>(dim));

  for (long p = 0; p < npoints; ++p) {
    chain.lattice.coords(p, x);
    const bool boundary = chain.lattice.is_boundary(p);
    for (int r = 0; r < m0; ++r) {
      const int s = chain.state_index(p, r);
      game.costs.terminal[static_cast<size_t>(s)] = spec.terminal_cost_at(x, r);
      if (boundary) continue;  // absorbing: self-loop already set, delta stays 1

      spec.covariance_at(x, r, a);
      double den = -spec.q(r, r) * h * h;
      for (int d = 0; d < dim; ++d) {
        margin[static_cast<size_t>(d)] = dominance_margin(a, dim, d);
        den += a[static_cast<size_t>(d) * dim + d];
      }
      for (int d = 0; d < dim; ++d)
        for (int k = d + 1; k < dim; ++k) den -= std::abs(a[static_cast<size_t>(d) * dim + k]);
      const double big_d = den + spec.beta * h * h;  // D^h
      if (!(den > 0.0))
        throw DegenerateDiffusionError("D^h - beta h^2 is not positive at " + point_label(x));

      const double dt = h * h / big_d;
      chain.dt[static_cast<size_t>(s)] = dt;
      chain.denom[static_cast<size_t>(s)] = big_d;
      game.discount[static_cast<size_t>(s)] = std::exp(-spec.beta * dt);

      // control-independent part of the row: diagonal corners and regime switches
      std::vector<Transition> fixed;
      for (int d = 0; d < dim; ++d) {
        for (int k = d + 1; k < dim; ++k) {
          const double adk = a[static_cast<size_t>(d) * dim + k];
          const double plus = std::max(adk, 0.0);
          const double minus = std::max(-adk, 0.0);
          const long pp = chain.lattice.index_shift(chain.lattice.index_shift(p, d, 1), k, 1);
          const long mm = chain.lattice.index_shift(chain.lattice.index_shift(p, d, -1), k, -1);
          const long pm = chain.lattice.index_shift(chain.lattice.index_shift(p, d, 1), k, -1);
          const long mp = chain.lattice.index_shift(chain.lattice.index_shift(p, d, -1), k, 1);
          if (plus > 0.0) {
            fixed.push_back({chain.state_index(pp, r), 0.5 * plus / den});
            fixed.push_back({chain.state_index(mm, r), 0.5 * plus / den});
          }
          if (minus > 0.0) {
            fixed.push_back({chain.state_index(pm, r), 0.5 * minus / den});
            fixed.push_back({chain.state_index(mp, r), 0.5 * minus / den});
          }
        }
      }
      for (int l = 0; l < m0; ++l) {
        if (l == r) continue;
        const double q = spec.q(r, l);
        if (q > 0.0) fixed.push_back({chain.state_index(p, l), q * h * h / den});
      }

      for (int i = 0; i < n1; ++i) {
        const double r1 = spec.u1.point(i);
        for (int j = 0; j < n2; ++j) {
          const double r2 = spec.u2.point(j);
          spec.drift_at(x, r, r1, r2, b);
          std::vector<Transition> row;
          row.reserve(2 * static_cast<size_t>(dim) + fixed.size());
          for (int d = 0; d < dim; ++d) {
            const double up = h * b[static_cast<size_t>(d)] + margin[static_cast<size_t>(d)];
            const double down = -h * b[static_cast<size_t>(d)] + margin[static_cast<size_t>(d)];
            if (up < -1e-12 * den || down < -1e-12 * den) {
              if (h_bound_on_failure < 0.0)
                h_bound_on_failure = max_h_bound(spec, chain.lattice);
              throw HTooLargeError(h, h_bound_on_failure);
            }
            if (down > 0.0)
              row.push_back({chain.state_index(chain.lattice.index_shift(p, d, -1), r),
                             0.5 * down / den});
            if (up > 0.0)
              row.push_back({chain.state_index(chain.lattice.index_shift(p, d, 1), r),
                             0.5 * up / den});
          }
          row.insert(row.end(), fixed.begin(), fixed.end());
          game.kernel.set_row(s, i, j, std::move(row));
          game.costs.run(s, i, j) = dt * spec.running_cost_at(x, r, r1, r2);
        }
      }

      if (separable_cost) {
        const auto& k = spec.running_cost;
        for (int i = 0; i < n1; ++i) {
          const double r1 = spec.u1.point(i);
          game.structure.part1[static_cast<size_t>(s) * n1 + i] =
              dt * (k.p0(x, r) + k.p1(x, r) * r1 + k.p11(x, r) * r1 * r1);
        }
        for (int j = 0; j < n2; ++j) {
          const double r2 = spec.u2.point(j);
          game.structure.part2[static_cast<size_t>(s) * n2 + j] =
              dt * (k.p2(x, r) * r2 + k.p22(x, r) * r2 * r2);
        }
      }
    }
  }

  chain.game = std::move(game);
  return chain;
}

ConsistencyReport check_local_consistency(const ChainApproximation& chain,
                                          const DiffusionGameSpec& spec, int sample_controls,
                                          double c_max) {
  const int dim = spec.dim;
  const int n1 = spec.u1.size(), n2 = spec.u2.size();
  const int pairs = n1 * n2;
  int stride = 1;
  if (sample_controls > 0 && sample_controls < pairs)
    stride = std::max(1, pairs / sample_controls);

  ConsistencyReport rep;
  std::vector<double> x(static_cast<size_t>(dim)), y(static_cast<size_t>(dim));
  std::vector<double> a(static_cast<size_t>(dim) * dim), b(static_cast<size_t>(dim));
  std::vector<double> mean(static_cast<size_t>(dim));
  std::vector<double> second(static_cast<size_t>(dim) * dim);
  std::vector<double> switch_prob(static_cast<size_t>(spec.num_regimes));

  std::string worst_what;
  auto note_defect = [&](double defect, double& slot, const char* what, int regime) {
    if (defect > slot) {
      slot = defect;
      if (defect >= rep.worst_mean_rel_defect && defect >= rep.worst_regime_rel_defect) {
        rep.worst_point = x;
        rep.worst_regime = regime;
        worst_what = what;
      }
    }
  };

  for (long p = 0; p < chain.lattice.num_points(); ++p) {
    if (chain.lattice.is_boundary(p)) continue;
    chain.lattice.coords(p, x);
    for (int r = 0; r < spec.num_regimes; ++r) {
      const int s = chain.state_index(p, r);
      const double dt = chain.dt[static_cast<size_t>(s)];
      spec.covariance_at(x, r, a);
      for (int pair = 0; pair < pairs; pair += stride) {
        const int i = pair / n2, j = pair % n2;
        const double r1 = spec.u1.point(i), r2 = spec.u2.point(j);
        spec.drift_at(x, r, r1, r2, b);

        std::fill(mean.begin(), mean.end(), 0.0);
        std::fill(second.begin(), second.end(), 0.0);
        std::fill(switch_prob.begin(), switch_prob.end(), 0.0);
        for (const Transition& t : chain.game.kernel.row(s, i, j)) {
          const long tp = chain.point_of(t.target);
          const int tr = chain.regime_of(t.target);
          if (tr != r) {
            switch_prob[static_cast<size_t>(tr)] += t.prob;
            continue;  // regime switches leave x unchanged
          }
          chain.lattice.coords(tp, y);
          double norm2 = 0.0;
          for (int d = 0; d < dim; ++d) {
            const double dx = y[static_cast<size_t>(d)] - x[static_cast<size_t>(d)];
            mean[static_cast<size_t>(d)] += t.prob * dx;
            norm2 += dx * dx;
            for (int k = 0; k < dim; ++k)
              second[static_cast<size_t>(d) * dim + k] +=
                  t.prob * dx * (y[static_cast<size_t>(k)] - x[static_cast<size_t>(k)]);
          }
          rep.max_step_over_h = std::max(rep.max_step_over_h, std::sqrt(norm2) / chain.h);
        }

        for (int d = 0; d < dim; ++d) {
          const double target = b[static_cast<size_t>(d)] * dt;
          const double got = mean[static_cast<size_t>(d)];
          const double defect = std::abs(target) > 1e-300
                                    ? std::abs(got / target - 1.0)
                                    : std::abs(got) / (chain.h * dt);
          note_defect(defect, rep.worst_mean_rel_defect, "conditional mean", r);
        }
        for (int d = 0; d < dim; ++d) {
          for (int k = 0; k < dim; ++k) {
            const double cov = second[static_cast<size_t>(d) * dim + k] -
                               mean[static_cast<size_t>(d)] * mean[static_cast<size_t>(k)];
            const double defect =
                std::abs(cov - a[static_cast<size_t>(d) * dim + k] * dt) / (chain.h * dt);
            if (defect > rep.worst_cov_defect) rep.worst_cov_defect = defect;
          }
        }
        for (int l = 0; l < spec.num_regimes; ++l) {
          if (l == r) continue;
          const double target = spec.q(r, l) * dt;
          const double got = switch_prob[static_cast<size_t>(l)];
          const double defect = target > 1e-300 ? std::abs(got / target - 1.0) : got / dt;
          note_defect(defect, rep.worst_regime_rel_defect, "regime switch rate", r);
        }
        ++rep.samples;
      }
    }
  }

  const double h2 = chain.h * chain.h;
  rep.constant_c = std::max(rep.worst_mean_rel_defect, rep.worst_regime_rel_defect) / h2;
  const double worst = std::max(rep.worst_mean_rel_defect, rep.worst_regime_rel_defect);
  if (worst > c_max * h2) {
    std::ostringstream os;
    os << "local consistency: " << worst_what << " relative defect " << worst << " at "
       << point_label(rep.worst_point) << " regime " << rep.worst_regime << " exceeds "
       << c_max << "*h^2 = " << c_max * h2;
    throw ConsistencyViolationError(os.str());
  }
  return rep;
}

}  // namespace zsg
