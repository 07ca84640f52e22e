#include <cmath>
#include <cstdio>
#include <limits>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "zsg/config.hpp"
#include "zsg/csv.hpp"
#include "zsg/errors.hpp"
#include "zsg/harness.hpp"
#include "zsg/parallel.hpp"

namespace {

// Exit codes shared with the test suite and documented in the README.
enum ExitCode {
  kOk = 0,
  kConfigError = 1,
  kNotConverged = 2,
  kValidationFailure = 3,
  kHBoundViolation = 4,
  kSweepFailure = 5,
  kTruncationWarning = 6,
};

struct Problem {
  zsg::MarkovGame game;
  std::optional<zsg::ChainApproximation> chain;  // set for diffusion problems
  std::optional<zsg::DiffusionGameSpec> spec;
  std::string label;
};

double require_h(const zsg::RunConfig& config) {
  if (!config.h) throw zsg::ConfigError("config field 'h': required for diffusion problems");
  return *config.h;
}

// The diffusion spec behind the configured problem, whether inline or builtin.
const zsg::DiffusionGameSpec& resolve_diffusion(const zsg::RunConfig& config) {
  if (config.diffusion) return *config.diffusion;
  if (config.builtin) {
    const zsg::BuiltinProblem* b = zsg::find_builtin(*config.builtin);
    if (!b) throw zsg::ConfigError("config field 'problem.builtin': unknown name '" +
                                   *config.builtin + "'");
    if (b->diffusion) return *b->diffusion;
  }
  throw zsg::ConfigError(
      "config field 'problem': this command needs a diffusion problem "
      "(builtin diffusion or inline spec)");
}

// Resolves the configured problem source; diffusion problems are discretized
// at the configured h.
Problem resolve_problem(const zsg::RunConfig& config) {
  Problem p;
  if (config.builtin) {
    const zsg::BuiltinProblem* b = zsg::find_builtin(*config.builtin);
    if (!b) throw zsg::ConfigError("config field 'problem.builtin': unknown name '" +
                                   *config.builtin + "'");
    if (b->game) {
      p.label = b->name;
      p.game = *b->game;
      return p;
    }
  } else if (config.game) {
    p.game = *config.game;
    p.label = "inline-game";
    return p;
  }
  const zsg::DiffusionGameSpec& spec = resolve_diffusion(config);
  p.label = spec.name.empty() ? "diffusion" : spec.name;
  p.spec = spec;
  p.chain = zsg::build_chain(spec, require_h(config));
  p.game = p.chain->game;
  return p;
}

void write_summary(const std::string& path, const std::map<std::string, std::string>& kv) {
  std::ostringstream os;
  for (const auto& [k, v] : kv) os << k << '=' << v << '\n';
  zsg::write_file(path, os.str());
}

std::string out_path(const std::string& dir, const std::string& name) {
  std::filesystem::create_directories(dir);
  return (std::filesystem::path(dir) / name).string();
}

long default_discrete_max_steps(const zsg::MarkovGame& game) {
  double max_delta = 0.0;
  for (double d : game.discount) max_delta = std::max(max_delta, d);
  if (max_delta < 1.0) return static_cast<long>(std::ceil(20.0 / (1.0 - max_delta)));
  const double gamma = zsg::check_absorption(game);
  if (gamma > 0.0)
    return static_cast<long>(std::ceil(20.0 * game.n_states() / gamma));
  return 1000L * game.n_states();
}

int cmd_solve(const zsg::RunConfig& config) {
  Problem p = resolve_problem(config);
  const auto violations = zsg::validate_game(p.game);
  if (!violations.empty()) {
    for (const auto& v : violations) std::cerr << "validation: " << v.what << '\n';
    return kValidationFailure;
  }

  std::map<zsg::SolveMode, zsg::ValueFunction> values;
  std::map<std::string, std::string> summary;
  summary["command"] = "solve";
  summary["problem"] = p.label;
  bool all_converged = true;
  for (zsg::SolveMode mode : config.solve.modes) {
    zsg::SolveOptions opts;
    opts.tol = config.solve.tol;
    opts.max_iter = config.solve.max_iter;
    zsg::SolveResult sol = zsg::solve(p.game, mode, opts);
    all_converged = all_converged && sol.report.converged;
    const std::string m = zsg::to_string(mode);
    summary["iterations_" + m] = std::to_string(sol.report.iterations);
    summary["residual_" + m] = zsg::fmt17(sol.report.final_residual);
    summary["converged_" + m] = sol.report.converged ? "1" : "0";
    summary["certificate_" + m] = sol.report.certificate_route + ":" +
                                  zsg::fmt17(sol.report.contraction_certificate);
    const zsg::FeedbackPolicy policy =
        zsg::extract_policies(p.game, sol.value, mode, config.solve.tol);
    zsg::write_file(out_path(config.out_dir, "policy_" + m + ".csv"),
                    zsg::policy_csv(p.game, policy, mode, p.chain ? &*p.chain : nullptr));
    values[mode] = std::move(sol.value);
  }
  if (values.count(zsg::SolveMode::PureUpper) && values.count(zsg::SolveMode::PureLower)) {
    const auto gap = zsg::saddle_gap(values[zsg::SolveMode::PureUpper],
                                     values[zsg::SolveMode::PureLower]);
    summary["rho"] = zsg::fmt17(gap.rho);
    summary["rho_argmax_state"] = p.game.space.names[static_cast<size_t>(gap.argmax_state)];
  }
  zsg::write_file(out_path(config.out_dir, "values.csv"),
                  zsg::values_csv(p.game, values, p.chain ? &*p.chain : nullptr));
  write_summary(out_path(config.out_dir, "run_summary.txt"), summary);
  return all_converged ? kOk : kNotConverged;
}

int cmd_build(const zsg::RunConfig& config) {
  const zsg::DiffusionGameSpec& spec = resolve_diffusion(config);
  const zsg::ChainApproximation chain = zsg::build_chain(spec, require_h(config));
  zsg::write_file(out_path(config.out_dir, "chain_edges.csv"), zsg::chain_edges_csv(chain));
  zsg::write_file(out_path(config.out_dir, "chain_states.csv"), zsg::chain_states_csv(chain));
  write_summary(out_path(config.out_dir, "run_summary.txt"),
                {{"command", "build"},
                 {"h", zsg::fmt17(chain.h)},
                 {"states", std::to_string(chain.game.n_states())},
                 {"regimes", std::to_string(chain.num_regimes)}});
  return kOk;
}

int cmd_check(const zsg::RunConfig& config) {
  const zsg::DiffusionGameSpec& spec = resolve_diffusion(config);
  const double h = require_h(config);
  const zsg::LatticeSpec lattice = zsg::LatticeSpec::build(spec.domain, h);
  const zsg::DominanceReport dom = zsg::diagonal_dominance_check(spec, lattice);
  if (!dom.ok) {
    std::cerr << "check: diagonal dominance fails, worst margin " << dom.worst_margin << '\n';
    zsg::write_file(out_path(config.out_dir, "consistency.csv"),
                    zsg::consistency_csv({}, dom, h, 0.0));
    return kValidationFailure;
  }
  const double h_max = zsg::max_h_bound(spec, lattice);
  if (h > h_max) {
    std::cerr << "check: h=" << h << " exceeds h_max=" << h_max << '\n';
    zsg::write_file(out_path(config.out_dir, "consistency.csv"),
                    zsg::consistency_csv({}, dom, h, h_max));
    return kHBoundViolation;
  }
  const zsg::ChainApproximation chain = zsg::build_chain(spec, h);
  zsg::ConsistencyReport report;
  int code = kOk;
  try {
    report = zsg::check_local_consistency(chain, spec, config.check.sample_controls,
                                          config.check.c_max);
  } catch (const zsg::ConsistencyViolationError& e) {
    std::cerr << "check: " << e.what() << '\n';
    report = zsg::check_local_consistency(chain, spec, config.check.sample_controls,
                                          std::numeric_limits<double>::infinity());
    code = kValidationFailure;
  }
  zsg::write_file(out_path(config.out_dir, "consistency.csv"),
                  zsg::consistency_csv(report, dom, h, h_max));
  write_summary(out_path(config.out_dir, "run_summary.txt"),
                {{"command", "check"},
                 {"h", zsg::fmt17(h)},
                 {"h_max", zsg::fmt17(h_max)},
                 {"constant_c", zsg::fmt17(report.constant_c)},
                 {"ok", code == kOk ? "1" : "0"}});
  return code;
}

int cmd_sweep(const zsg::RunConfig& config) {
  const zsg::DiffusionGameSpec& spec = resolve_diffusion(config);
  if (config.sweep.h_list.empty())
    throw zsg::ConfigError("config field 'sweep.h_list': required and nonempty");
  try {
    const zsg::SweepResult result =
        zsg::h_sweep(spec, config.sweep.h_list, config.sweep.probe_points, config.sweep.modes,
                     config.sweep.tol, config.sweep.max_iter);
    zsg::write_file(out_path(config.out_dir, "sweep.csv"), zsg::sweep_csv(result));
    zsg::write_file(out_path(config.out_dir, "sweep_plot.csv"), zsg::sweep_plot_csv(result));
    std::map<std::string, std::string> summary{{"command", "sweep"},
                                               {"rows", std::to_string(result.rows.size())}};
    for (const auto& row : result.rows)
      summary["wall_seconds_h" + zsg::fmt17(row.h)] = zsg::fmt17(row.wall_seconds);
    write_summary(out_path(config.out_dir, "run_summary.txt"), summary);
    return kOk;
  } catch (const zsg::ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    std::cerr << "sweep: " << e.what() << '\n';
    return kSweepFailure;
  }
}

int cmd_simulate(const zsg::RunConfig& config, std::optional<std::uint64_t> seed_override) {
  Problem p = resolve_problem(config);
  const auto violations = zsg::validate_game(p.game);
  if (!violations.empty()) {
    for (const auto& v : violations) std::cerr << "validation: " << v.what << '\n';
    return kValidationFailure;
  }

  zsg::SolveOptions opts;
  opts.tol = config.simulate.tol;
  opts.max_iter = config.simulate.max_iter;
  const zsg::SolveResult sol = zsg::solve(p.game, config.simulate.policy_mode, opts);
  if (!sol.report.converged) return kNotConverged;
  const zsg::FeedbackPolicy policy =
      zsg::extract_policies(p.game, sol.value, config.simulate.policy_mode, config.simulate.tol);

  int start = -1;
  std::string start_label;
  if (p.chain) {
    std::vector<double> point = config.simulate.start_point;
    if (point.empty()) {
      point.resize(static_cast<size_t>(p.chain->lattice.dim()));
      for (int d = 0; d < p.chain->lattice.dim(); ++d)
        point[static_cast<size_t>(d)] = 0.5 * (p.spec->domain.lo[static_cast<size_t>(d)] +
                                               p.spec->domain.hi[static_cast<size_t>(d)]);
    }
    if (static_cast<int>(point.size()) != p.chain->lattice.dim())
      throw zsg::ConfigError("config field 'simulate.start_point': wrong dimension");
    if (config.simulate.start_regime >= p.chain->num_regimes)
      throw zsg::ConfigError("config field 'simulate.start_regime': out of range");
    start = p.chain->state_index(p.chain->lattice.nearest(point), config.simulate.start_regime);
  } else if (!config.simulate.start_state.empty()) {
    start = p.game.space.index_of(config.simulate.start_state);
    if (start < 0)
      throw zsg::ConfigError("config field 'simulate.start_state': unknown state '" +
                             config.simulate.start_state + "'");
  } else {
    for (int x = 0; x < p.game.n_states() && start < 0; ++x)
      if (!p.game.space.is_absorbing(x)) start = x;
    if (start < 0) start = 0;
  }
  start_label = p.game.space.names[static_cast<size_t>(start)];

  long max_steps = config.simulate.max_steps;
  if (max_steps <= 0)
    max_steps = p.chain ? zsg::default_max_steps(*p.chain) : default_discrete_max_steps(p.game);
  const std::uint64_t seed = seed_override.value_or(config.simulate.seed);

  const zsg::SimulationEstimate est =
      zsg::simulate_cost(p.game, policy, policy, start, config.simulate.paths, max_steps, seed);
  zsg::write_file(out_path(config.out_dir, "simulation.csv"),
                  zsg::simulation_csv(est, start_label, max_steps));
  write_summary(out_path(config.out_dir, "run_summary.txt"),
                {{"command", "simulate"},
                 {"start", start_label},
                 {"mean", zsg::fmt17(est.mean)},
                 {"std_error", zsg::fmt17(est.std_error)},
                 {"dp_value_at_start", zsg::fmt17(sol.value[static_cast<size_t>(start)])},
                 {"truncated_fraction", zsg::fmt17(est.truncated_fraction)}});
  return est.truncation_warning ? kTruncationWarning : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"zsg: zero-sum Markov game solver and Markov chain approximation toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  int workers = 0;
  std::uint64_t seed = 0;
  bool seed_set = false;
  app.add_option("--config", config_path, "path to a JSON problem configuration")->required();
  app.add_option("--out", out_dir, "output directory (overrides config out_dir)");
  app.add_option("--workers", workers, "max worker threads (overrides config)");
  app.add_option("--seed", seed, "simulation seed (overrides config)")
      ->each([&](const std::string&) { seed_set = true; });

  auto* solve = app.add_subcommand("solve", "solve the configured game in each mode");
  auto* build = app.add_subcommand("build", "discretize a diffusion game and export the chain");
  auto* check = app.add_subcommand("check", "assumption and local-consistency checks");
  auto* sweep = app.add_subcommand("sweep", "mesh refinement study over sweep.h_list");
  auto* simulate = app.add_subcommand("simulate", "Monte-Carlo cost under extracted policies");
  auto* dump = app.add_subcommand("config-dump", "parse and re-emit the canonical configuration");
  bool dump_matrices = false;
  dump->add_flag("--matrices", dump_matrices,
                 "print the per-state running-cost matrices instead of the config");
  for (CLI::App* sub : {solve, build, check, sweep, simulate, dump}) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    zsg::RunConfig config = zsg::load_config(config_path);
    if (!out_dir.empty()) config.out_dir = out_dir;
    if (workers > 0) config.workers = workers;
    zsg::set_max_workers(config.workers);

    if (dump->parsed()) {
      if (dump_matrices) {
        const Problem p = resolve_problem(config);
        for (int x = 0; x < p.game.n_states(); ++x) {
          if (p.game.space.is_absorbing(x)) continue;
          zsg::CostMatrix m(p.game.n1(), p.game.n2());
          for (int i = 0; i < p.game.n1(); ++i)
            for (int j = 0; j < p.game.n2(); ++j) m(i, j) = p.game.costs.run(x, i, j);
          std::cout << p.game.space.names[static_cast<size_t>(x)] << ":\n"
                    << zsg::format_matrix(m) << "\n";
        }
      } else {
        std::cout << zsg::dump_config(config);
      }
      return kOk;
    }
    if (solve->parsed()) return cmd_solve(config);
    if (build->parsed()) return cmd_build(config);
    if (check->parsed()) return cmd_check(config);
    if (sweep->parsed()) return cmd_sweep(config);
    if (simulate->parsed())
      return cmd_simulate(config, seed_set ? std::optional<std::uint64_t>(seed) : std::nullopt);
    return kConfigError;
  } catch (const zsg::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const zsg::HTooLargeError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kHBoundViolation;
  } catch (const zsg::NotContractiveError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidationFailure;
  } catch (const zsg::GameValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidationFailure;
  } catch (const zsg::DegenerateDiffusionError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidationFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  }
}
