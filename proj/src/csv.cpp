#include "zsg/csv.hpp"

#include <cmath>
#include <cstdio>
#include <span>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace zsg {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

void coord_header(std::ostringstream& os, int dim) {
  for (int d = 0; d < dim; ++d) os << ",x" << (d + 1);
}

void coord_cells(std::ostringstream& os, std::span<const double> x) {
  for (double c : x) os << ',' << fmt17(c);
}

}  // namespace

std::string values_csv(const MarkovGame& game, const std::map<SolveMode, ValueFunction>& values,
                       const ChainApproximation* chain) {
  std::ostringstream os;
  os << "state";
  if (chain) {
    coord_header(os, chain->lattice.dim());
    os << ",regime";
  }
  for (const auto& [mode, v] : values) os << ",value_" << to_string(mode);
  os << '\n';
  std::vector<double> x(chain ? static_cast<size_t>(chain->lattice.dim()) : 0);
  for (int s = 0; s < game.n_states(); ++s) {
    os << game.space.names[static_cast<size_t>(s)];
    if (chain) {
      chain->lattice.coords(chain->point_of(s), x);
      coord_cells(os, x);
      os << ',' << chain->regime_of(s);
    }
    for (const auto& [mode, v] : values) os << ',' << fmt17(v[static_cast<size_t>(s)]);
    os << '\n';
  }
  return os.str();
}

std::string policy_csv(const MarkovGame& game, const FeedbackPolicy& policy, SolveMode mode,
                       const ChainApproximation* chain) {
  std::ostringstream os;
  os << "state";
  if (chain) {
    coord_header(os, chain->lattice.dim());
    os << ",regime";
  }
  os << ",mode,kind,r1_index,r1,r2_index,r2";
  for (int i = 0; i < game.n1(); ++i) os << ",mu1_" << i;
  for (int j = 0; j < game.n2(); ++j) os << ",mu2_" << j;
  os << '\n';
  std::vector<double> x(chain ? static_cast<size_t>(chain->lattice.dim()) : 0);
  for (int s = 0; s < game.n_states(); ++s) {
    const auto& entry = policy.entries[static_cast<size_t>(s)];
    if (!entry) continue;  // absorbing states carry no policy
    os << game.space.names[static_cast<size_t>(s)];
    if (chain) {
      chain->lattice.coords(chain->point_of(s), x);
      coord_cells(os, x);
      os << ',' << chain->regime_of(s);
    }
    os << ',' << to_string(mode);
    if (entry->mixed) {
      os << ",mixed,-1,,-1,";
      for (double p : entry->mu1) os << ',' << fmt17(p);
      for (double p : entry->mu2) os << ',' << fmt17(p);
    } else {
      os << ",pure," << entry->r1 << ',' << fmt17(game.grid1.point(entry->r1)) << ','
         << entry->r2 << ',' << fmt17(game.grid2.point(entry->r2));
      for (int i = 0; i < game.n1(); ++i) os << ',' << (i == entry->r1 ? "1" : "0");
      for (int j = 0; j < game.n2(); ++j) os << ',' << (j == entry->r2 ? "1" : "0");
    }
    os << '\n';
  }
  return os.str();
}

std::string chain_edges_csv(const ChainApproximation& chain) {
  const int dim = chain.lattice.dim();
  std::ostringstream os;
  for (int d = 0; d < dim; ++d) os << (d ? ",x" : "x") << (d + 1);
  os << ",iota,r1,r2";
  for (int d = 0; d < dim; ++d) os << ",y" << (d + 1);
  os << ",ell,p\n";
  std::vector<double> x(static_cast<size_t>(dim)), y(static_cast<size_t>(dim));
  const MarkovGame& game = chain.game;
  for (int s = 0; s < game.n_states(); ++s) {
    if (game.space.is_absorbing(s)) continue;
    chain.lattice.coords(chain.point_of(s), x);
    const int iota = chain.regime_of(s);
    for (int i = 0; i < game.n1(); ++i) {
      for (int j = 0; j < game.n2(); ++j) {
        for (const Transition& t : game.kernel.row(s, i, j)) {
          chain.lattice.coords(chain.point_of(t.target), y);
          bool first = true;
          for (double c : x) {
            os << (first ? "" : ",") << fmt17(c);
            first = false;
          }
          os << ',' << iota << ',' << i << ',' << j;
          coord_cells(os, y);
          os << ',' << chain.regime_of(t.target) << ',' << fmt17(t.prob) << '\n';
        }
      }
    }
  }
  return os.str();
}

std::string chain_states_csv(const ChainApproximation& chain) {
  const int dim = chain.lattice.dim();
  std::ostringstream os;
  for (int d = 0; d < dim; ++d) os << (d ? ",x" : "x") << (d + 1);
  os << ",iota,dt,delta,absorbing\n";
  std::vector<double> x(static_cast<size_t>(dim));
  for (int s = 0; s < chain.game.n_states(); ++s) {
    chain.lattice.coords(chain.point_of(s), x);
    bool first = true;
    for (double c : x) {
      os << (first ? "" : ",") << fmt17(c);
      first = false;
    }
    os << ',' << chain.regime_of(s) << ',' << fmt17(chain.dt[static_cast<size_t>(s)]) << ','
       << fmt17(chain.game.discount[static_cast<size_t>(s)]) << ','
       << (chain.game.space.is_absorbing(s) ? 1 : 0) << '\n';
  }
  return os.str();
}

std::string sweep_csv(const SweepResult& result) {
  std::ostringstream os;
  os << "h,n_states,rho";
  for (SolveMode m : result.modes) os << ",iterations_" << to_string(m);
  for (SolveMode m : result.modes)
    for (size_t p = 0; p < result.probe_points.size(); ++p)
      for (int r = 0; r < result.num_regimes; ++r)
        os << ",v_" << to_string(m) << "_p" << p << "_r" << r;
  os << '\n';
  for (const SweepRow& row : result.rows) {
    os << fmt17(row.h) << ',' << row.n_states << ','
       << (std::isnan(row.rho) ? "" : fmt17(row.rho));
    for (SolveMode m : result.modes) os << ',' << row.iterations.at(m);
    for (SolveMode m : result.modes)
      for (double v : row.probe_values.at(m)) os << ',' << fmt17(v);
    os << '\n';
  }
  return os.str();
}

std::string sweep_plot_csv(const SweepResult& result) {
  std::ostringstream os;
  os << "h,mode,probe,regime,value,diff_to_next\n";
  for (size_t k = 0; k < result.rows.size(); ++k) {
    const SweepRow& row = result.rows[k];
    for (SolveMode m : result.modes) {
      const auto& values = row.probe_values.at(m);
      for (size_t p = 0; p < result.probe_points.size(); ++p) {
        for (int r = 0; r < result.num_regimes; ++r) {
          const size_t idx = p * static_cast<size_t>(result.num_regimes) + r;
          os << fmt17(row.h) << ',' << to_string(m) << ',' << p << ',' << r << ','
             << fmt17(values[idx]);
          if (k + 1 < result.rows.size()) {
            const double next = result.rows[k + 1].probe_values.at(m)[idx];
            os << ',' << fmt17(std::abs(values[idx] - next));
          } else {
            os << ',';
          }
          os << '\n';
        }
      }
    }
  }
  return os.str();
}

std::string simulation_csv(const SimulationEstimate& est, const std::string& start_label,
                           long max_steps) {
  std::ostringstream os;
  os << "start,mean,std_error,paths,seed,max_steps,truncated_paths,truncated_fraction\n";
  os << start_label << ',' << fmt17(est.mean) << ',' << fmt17(est.std_error) << ',' << est.paths
     << ',' << est.seed << ',' << max_steps << ',' << est.truncated_paths << ','
     << fmt17(est.truncated_fraction) << '\n';
  return os.str();
}

std::string consistency_csv(const ConsistencyReport& report, const DominanceReport& dom,
                            double h, double h_max) {
  std::ostringstream os;
  os << "h,h_max,dominance_ok,dominance_worst_margin,samples,worst_mean_rel_defect,"
        "worst_cov_defect,worst_regime_rel_defect,max_step_over_h,constant_c\n";
  os << fmt17(h) << ',' << fmt17(h_max) << ',' << (dom.ok ? 1 : 0) << ','
     << fmt17(dom.worst_margin) << ',' << report.samples << ','
     << fmt17(report.worst_mean_rel_defect) << ',' << fmt17(report.worst_cov_defect) << ','
     << fmt17(report.worst_regime_rel_defect) << ',' << fmt17(report.max_step_over_h) << ','
     << fmt17(report.constant_c) << '\n';
  return os.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

}  // namespace zsg
