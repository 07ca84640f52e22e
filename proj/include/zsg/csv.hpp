#pragma once

#include <map>
#include <string>

#include "zsg/chain.hpp"
#include "zsg/harness.hpp"
#include "zsg/solver.hpp"

namespace zsg {

/// Shortest-width decimal with 17 significant digits (%.*g); round-trips
/// binary64 exactly, so identical runs emit byte-identical files.
std::string fmt17(double v);

// Column layouts for all writers are documented in docs/csv_schema.md.

std::string values_csv(const MarkovGame& game, const std::map<SolveMode, ValueFunction>& values,
                       const ChainApproximation* chain = nullptr);
std::string policy_csv(const MarkovGame& game, const FeedbackPolicy& policy, SolveMode mode,
                       const ChainApproximation* chain = nullptr);
std::string chain_edges_csv(const ChainApproximation& chain);
std::string chain_states_csv(const ChainApproximation& chain);
std::string sweep_csv(const SweepResult& result);
/// Long-format companion to sweep_csv for log-log plotting: one row per
/// (h, mode, probe, regime) with the value and the |V^h - V^{h_next}|
/// difference to the next finer mesh (empty on the finest row).
std::string sweep_plot_csv(const SweepResult& result);
std::string simulation_csv(const SimulationEstimate& est, const std::string& start_label,
                           long max_steps);
std::string consistency_csv(const ConsistencyReport& report, const DominanceReport& dom,
                            double h, double h_max);

void write_file(const std::string& path, const std::string& content);

}  // namespace zsg
