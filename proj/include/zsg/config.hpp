#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "zsg/chain.hpp"
#include "zsg/solver.hpp"

namespace zsg {

struct SolveParams {
  std::vector<SolveMode> modes{SolveMode::PureUpper, SolveMode::PureLower,
                               SolveMode::RelaxedUpper, SolveMode::RelaxedLower};
  double tol = 1e-9;
  long max_iter = 1000000;
};

struct CheckParams {
  double c_max = 100.0;      // consistency constant bound
  int sample_controls = 0;   // 0 = every control pair
};

struct SweepParams {
  std::vector<double> h_list;
  std::vector<SolveMode> modes{SolveMode::PureUpper, SolveMode::PureLower,
                               SolveMode::RelaxedUpper};
  std::vector<std::vector<double>> probe_points;  // empty = domain center
  double tol = 1e-9;
  long max_iter = 1000000;
};

struct SimulateParams {
  long paths = 10000;
  long max_steps = 0;  // 0 = default horizon
  std::uint64_t seed = 1;
  SolveMode policy_mode = SolveMode::RelaxedUpper;
  double tol = 1e-9;
  long max_iter = 1000000;
  std::vector<double> start_point;  // diffusion problems; empty = domain center
  int start_regime = 0;
  std::string start_state;  // discrete problems; empty = first non-absorbing
};

/// Parsed problem configuration. Exactly one of builtin / game / diffusion is
/// set.
struct RunConfig {
  int version = 1;
  std::optional<std::string> builtin;
  std::optional<MarkovGame> game;
  std::optional<DiffusionGameSpec> diffusion;
  std::optional<double> h;  // default mesh for diffusion problems
  SolveParams solve;
  CheckParams check;
  SweepParams sweep;
  SimulateParams simulate;
  std::string out_dir = "out";
  int workers = 1;
};

/// Parses a JSON configuration document. Throws ConfigError with a
/// line-numbered diagnostic on syntax errors and a field-path diagnostic on
/// semantic errors (wrong types, out-of-range parameters, unknown names).
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);

/// Canonical JSON serialization; parse(dump(c)) reproduces an equivalent
/// config and dump is a fixpoint on its own output.
std::string dump_config(const RunConfig& config);

}  // namespace zsg
