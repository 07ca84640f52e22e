#include "zsg/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "zsg/errors.hpp"

namespace zsg {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw ConfigError("config field '" + path + "': " + msg);
}

const json* get(const json& j, const char* key) {
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

double require_number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

double positive_number(const json& j, const std::string& path) {
  const double v = require_number(j, path);
  if (!(v > 0.0)) fail(path, "must be > 0");
  return v;
}

long require_integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<long>();
}

std::string require_string(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

std::vector<double> number_list(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of numbers");
  std::vector<double> v;
  for (const auto& e : j) v.push_back(require_number(e, path));
  return v;
}

ControlGrid parse_grid(const json& j, const std::string& path) {
  ControlGrid g;
  if (!j.is_object()) fail(path, "expected {lo, hi, n}");
  const json* lo = get(j, "lo");
  const json* hi = get(j, "hi");
  const json* n = get(j, "n");
  if (!lo || !hi || !n) fail(path, "expected {lo, hi, n}");
  g.lo = require_number(*lo, path + ".lo");
  g.hi = require_number(*hi, path + ".hi");
  g.n_points = static_cast<int>(require_integer(*n, path + ".n"));
  if (g.n_points < 1) fail(path + ".n", "must be >= 1");
  if (g.lo > g.hi) fail(path, "lo must be <= hi");
  return g;
}

json dump_grid(const ControlGrid& g) {
  return json{{"lo", g.lo}, {"hi", g.hi}, {"n", g.n_points}};
}

StructureKind parse_structure(const json& j, const std::string& path) {
  const std::string s = require_string(j, path);
  if (s == "general") return StructureKind::General;
  if (s == "separable") return StructureKind::Separable;
  if (s == "bilinear") return StructureKind::Bilinear;
  fail(path, "unknown structure '" + s + "'");
}

// ---- scalar coefficient fields -------------------------------------------

std::vector<double> regime_vector(const json& j, int regimes, const std::string& path) {
  if (j.is_number()) return std::vector<double>(static_cast<size_t>(regimes), j.get<double>());
  auto v = number_list(j, path);
  if (static_cast<int>(v.size()) != regimes)
    fail(path, "expected " + std::to_string(regimes) + " per-regime values");
  return v;
}

std::vector<std::vector<double>> regime_coord_matrix(const json& j, int regimes, int dim,
                                                     const std::string& path) {
  if (!j.is_array()) fail(path, "expected per-regime arrays of per-coordinate values");
  std::vector<std::vector<double>> out;
  if (!j.empty() && j.front().is_number()) {
    // one array broadcast to every regime
    auto row = number_list(j, path);
    if (static_cast<int>(row.size()) != dim) fail(path, "expected dim values per row");
    out.assign(static_cast<size_t>(regimes), row);
    return out;
  }
  for (const auto& e : j) {
    auto row = number_list(e, path);
    if (static_cast<int>(row.size()) != dim) fail(path, "expected dim values per row");
    out.push_back(std::move(row));
  }
  if (static_cast<int>(out.size()) != regimes) fail(path, "expected one row per regime");
  return out;
}

PolyField parse_field(const json& j, int regimes, int dim, const std::string& path) {
  PolyField f;
  if (j.is_number()) {
    f.constant = regime_vector(j, regimes, path);
    return f;
  }
  if (!j.is_object()) fail(path, "expected a coefficient object or number");
  if (const json* c = get(j, "const")) f.constant = regime_vector(*c, regimes, path + ".const");
  if (const json* l = get(j, "linear"))
    f.linear = regime_coord_matrix(*l, regimes, dim, path + ".linear");
  if (const json* q = get(j, "quad")) f.quad = regime_coord_matrix(*q, regimes, dim, path + ".quad");
  if (const json* t = get(j, "table")) {
    TabulatedField tab;
    const std::string tpath = path + ".table";
    const json* origin = get(*t, "origin");
    const json* h = get(*t, "h");
    const json* shape = get(*t, "shape");
    const json* values = get(*t, "values");
    if (!origin || !h || !shape || !values) fail(tpath, "expected {origin, h, shape, values}");
    tab.origin = number_list(*origin, tpath + ".origin");
    tab.h = positive_number(*h, tpath + ".h");
    for (const auto& e : *shape)
      tab.shape.push_back(static_cast<int>(require_integer(e, tpath + ".shape")));
    if (static_cast<int>(tab.origin.size()) != dim || static_cast<int>(tab.shape.size()) != dim)
      fail(tpath, "origin/shape must have dim entries");
    long cells = 1;
    for (int n : tab.shape) {
      if (n < 1) fail(tpath + ".shape", "entries must be >= 1");
      cells *= n;
    }
    if (!values->is_array()) fail(tpath + ".values", "expected per-regime arrays");
    for (const auto& e : *values) {
      auto row = number_list(e, tpath + ".values");
      if (static_cast<long>(row.size()) != cells)
        fail(tpath + ".values", "expected " + std::to_string(cells) + " values per regime");
      tab.values.push_back(std::move(row));
    }
    if (static_cast<int>(tab.values.size()) != regimes)
      fail(tpath + ".values", "expected one array per regime");
    f.table = std::move(tab);
  }
  return f;
}

json dump_field(const PolyField& f) {
  json j = json::object();
  if (!f.constant.empty()) j["const"] = f.constant;
  if (!f.linear.empty()) j["linear"] = f.linear;
  if (!f.quad.empty()) j["quad"] = f.quad;
  if (f.table) {
    j["table"] = json{{"origin", f.table->origin},
                      {"h", f.table->h},
                      {"shape", f.table->shape},
                      {"values", f.table->values}};
  }
  return j;
}

std::vector<PolyField> parse_field_list(const json& j, int count, int regimes, int dim,
                                        const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of coefficient fields");
  if (static_cast<int>(j.size()) != count)
    fail(path, "expected " + std::to_string(count) + " fields");
  std::vector<PolyField> out;
  for (size_t k = 0; k < j.size(); ++k)
    out.push_back(parse_field(j[k], regimes, dim, path + "[" + std::to_string(k) + "]"));
  return out;
}

// ---- diffusion specs ------------------------------------------------------

DiffusionGameSpec parse_diffusion(const json& j, const std::string& path) {
  DiffusionGameSpec s;
  if (!j.is_object()) fail(path, "expected an object");
  if (const json* n = get(j, "name")) s.name = require_string(*n, path + ".name");
  const json* dim = get(j, "dim");
  const json* regimes = get(j, "regimes");
  if (!dim || !regimes) fail(path, "dim and regimes are required");
  s.dim = static_cast<int>(require_integer(*dim, path + ".dim"));
  s.num_regimes = static_cast<int>(require_integer(*regimes, path + ".regimes"));
  if (s.dim < 1) fail(path + ".dim", "must be >= 1");
  if (s.num_regimes < 1) fail(path + ".regimes", "must be >= 1");

  const json* domain = get(j, "domain");
  if (!domain) fail(path + ".domain", "required");
  const json* lo = get(*domain, "lo");
  const json* hi = get(*domain, "hi");
  if (!lo || !hi) fail(path + ".domain", "expected {lo, hi}");
  s.domain.lo = number_list(*lo, path + ".domain.lo");
  s.domain.hi = number_list(*hi, path + ".domain.hi");

  const json* controls = get(j, "controls");
  if (!controls) fail(path + ".controls", "required");
  const json* u1 = get(*controls, "u1");
  const json* u2 = get(*controls, "u2");
  if (!u1 || !u2) fail(path + ".controls", "expected {u1, u2}");
  s.u1 = parse_grid(*u1, path + ".controls.u1");
  s.u2 = parse_grid(*u2, path + ".controls.u2");

  const json* beta = get(j, "beta");
  if (!beta) fail(path + ".beta", "required");
  s.beta = positive_number(*beta, path + ".beta");

  const json* gen = get(j, "generator");
  if (!gen || !gen->is_array()) fail(path + ".generator", "expected an array of rows");
  for (const auto& row : *gen) {
    auto r = number_list(row, path + ".generator");
    if (static_cast<int>(r.size()) != s.num_regimes)
      fail(path + ".generator", "rows must have `regimes` entries");
    s.generator.insert(s.generator.end(), r.begin(), r.end());
  }
  if (static_cast<int>(s.generator.size()) != s.num_regimes * s.num_regimes)
    fail(path + ".generator", "expected one row per regime");

  const json* cov = get(j, "covariance");
  if (!cov) fail(path + ".covariance", "required");
  s.covariance = parse_field_list(*cov, s.dim * s.dim, s.num_regimes, s.dim, path + ".covariance");

  const json* drift = get(j, "drift");
  if (!drift) fail(path + ".drift", "required");
  const json* family = get(*drift, "family");
  if (!family) fail(path + ".drift.family", "required");
  s.drift.family = parse_structure(*family, path + ".drift.family");
  auto drift_part = [&](const char* key, std::vector<PolyField>& out) {
    if (const json* part = get(*drift, key))
      out = parse_field_list(*part, s.dim, s.num_regimes, s.dim,
                             path + ".drift." + key);
  };
  drift_part("b0", s.drift.b0);
  drift_part("b1", s.drift.b1);
  drift_part("b2", s.drift.b2);
  drift_part("b3", s.drift.b3);

  if (const json* rc = get(j, "running_cost")) {
    if (!rc->is_object()) fail(path + ".running_cost", "expected an object");
    auto part = [&](const char* key, PolyField& out) {
      if (const json* p = get(*rc, key))
        out = parse_field(*p, s.num_regimes, s.dim, path + ".running_cost." + key);
    };
    part("p0", s.running_cost.p0);
    part("p1", s.running_cost.p1);
    part("p2", s.running_cost.p2);
    part("p11", s.running_cost.p11);
    part("p22", s.running_cost.p22);
    part("p12", s.running_cost.p12);
  }
  if (const json* tc = get(j, "terminal_cost"))
    s.terminal_cost = parse_field(*tc, s.num_regimes, s.dim, path + ".terminal_cost");
  if (const json* st = get(j, "structure"))
    s.structure = parse_structure(*st, path + ".structure");
  return s;
}

json dump_diffusion(const DiffusionGameSpec& s) {
  json j;
  if (!s.name.empty()) j["name"] = s.name;
  j["dim"] = s.dim;
  j["regimes"] = s.num_regimes;
  j["domain"] = json{{"lo", s.domain.lo}, {"hi", s.domain.hi}};
  j["controls"] = json{{"u1", dump_grid(s.u1)}, {"u2", dump_grid(s.u2)}};
  j["beta"] = s.beta;
  json gen = json::array();
  for (int i = 0; i < s.num_regimes; ++i) {
    json row = json::array();
    for (int l = 0; l < s.num_regimes; ++l) row.push_back(s.q(i, l));
    gen.push_back(std::move(row));
  }
  j["generator"] = std::move(gen);
  json cov = json::array();
  for (const auto& f : s.covariance) cov.push_back(dump_field(f));
  j["covariance"] = std::move(cov);
  json drift;
  drift["family"] = to_string(s.drift.family);
  auto dump_part = [&](const char* key, const std::vector<PolyField>& part) {
    if (part.empty()) return;
    json arr = json::array();
    for (const auto& f : part) arr.push_back(dump_field(f));
    drift[key] = std::move(arr);
  };
  dump_part("b0", s.drift.b0);
  dump_part("b1", s.drift.b1);
  dump_part("b2", s.drift.b2);
  dump_part("b3", s.drift.b3);
  j["drift"] = std::move(drift);
  json rc;
  rc["p0"] = dump_field(s.running_cost.p0);
  rc["p1"] = dump_field(s.running_cost.p1);
  rc["p2"] = dump_field(s.running_cost.p2);
  rc["p11"] = dump_field(s.running_cost.p11);
  rc["p22"] = dump_field(s.running_cost.p22);
  rc["p12"] = dump_field(s.running_cost.p12);
  j["running_cost"] = std::move(rc);
  j["terminal_cost"] = dump_field(s.terminal_cost);
  j["structure"] = to_string(s.structure);
  return j;
}

// ---- inline discrete games ------------------------------------------------

MarkovGame parse_game(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  const json* states = get(j, "states");
  if (!states || !states->is_array() || states->empty())
    fail(path + ".states", "expected a nonempty array of names");
  StateSpace space;
  for (const auto& e : *states) space.names.push_back(require_string(e, path + ".states"));
  space.absorbing.assign(space.names.size(), 0);
  if (const json* abs = get(j, "absorbing")) {
    if (!abs->is_array()) fail(path + ".absorbing", "expected an array of state names");
    for (const auto& e : *abs) {
      const std::string name = require_string(e, path + ".absorbing");
      const int idx = space.index_of(name);
      if (idx < 0) fail(path + ".absorbing", "unknown state '" + name + "'");
      space.absorbing[static_cast<size_t>(idx)] = 1;
    }
  }

  const json* controls = get(j, "controls");
  if (!controls) fail(path + ".controls", "required");
  const json* u1 = get(*controls, "u1");
  const json* u2 = get(*controls, "u2");
  if (!u1 || !u2) fail(path + ".controls", "expected {u1, u2}");
  MarkovGame game = MarkovGame::create(std::move(space), parse_grid(*u1, path + ".controls.u1"),
                                       parse_grid(*u2, path + ".controls.u2"));

  auto state_index = [&](const json& e, const std::string& p) {
    const std::string name = require_string(e, p);
    const int idx = game.space.index_of(name);
    if (idx < 0) fail(p, "unknown state '" + name + "'");
    return idx;
  };

  if (const json* trans = get(j, "transitions")) {
    if (!trans->is_array()) fail(path + ".transitions", "expected an array");
    int k = 0;
    for (const auto& e : *trans) {
      const std::string tpath = path + ".transitions[" + std::to_string(k++) + "]";
      const json* from = get(e, "from");
      const json* to = get(e, "to");
      if (!from || !to || !to->is_object()) fail(tpath, "expected {from, to} with `to` a map");
      const int x = state_index(*from, tpath + ".from");
      std::vector<Transition> row;
      for (const auto& [name, p] : to->items()) {
        const int y = game.space.index_of(name);
        if (y < 0) fail(tpath + ".to", "unknown state '" + name + "'");
        row.push_back({y, require_number(p, tpath + ".to")});
      }
      const json* r1 = get(e, "r1");
      const json* r2 = get(e, "r2");
      auto control_index = [&](const json* rj, int limit, const char* key) {
        if (!rj || rj->is_null()) return -1;
        const long v = require_integer(*rj, tpath + "." + key);
        if (v < 0 || v >= limit) fail(tpath + "." + key, "control index out of range");
        return static_cast<int>(v);
      };
      const int i = control_index(r1, game.n1(), "r1");
      const int jj = control_index(r2, game.n2(), "r2");
      for (int ii = (i < 0 ? 0 : i); ii <= (i < 0 ? game.n1() - 1 : i); ++ii)
        for (int jk = (jj < 0 ? 0 : jj); jk <= (jj < 0 ? game.n2() - 1 : jj); ++jk)
          game.kernel.set_row(x, ii, jk, row);
    }
  }

  if (const json* rc = get(j, "running_cost")) {
    if (!rc->is_array()) fail(path + ".running_cost", "expected an array");
    int k = 0;
    for (const auto& e : *rc) {
      const std::string cpath = path + ".running_cost[" + std::to_string(k++) + "]";
      const json* state = get(e, "state");
      const json* matrix = get(e, "matrix");
      if (!state || !matrix || !matrix->is_array()) fail(cpath, "expected {state, matrix}");
      const int x = state_index(*state, cpath + ".state");
      if (static_cast<int>(matrix->size()) != game.n1())
        fail(cpath + ".matrix", "expected one row per player-1 control");
      for (int i = 0; i < game.n1(); ++i) {
        auto row = number_list((*matrix)[static_cast<size_t>(i)], cpath + ".matrix");
        if (static_cast<int>(row.size()) != game.n2())
          fail(cpath + ".matrix", "expected one column per player-2 control");
        for (int jj = 0; jj < game.n2(); ++jj) game.costs.run(x, i, jj) = row[static_cast<size_t>(jj)];
      }
    }
  }
  if (const json* tc = get(j, "terminal_cost")) {
    if (!tc->is_object()) fail(path + ".terminal_cost", "expected a map state -> value");
    for (const auto& [name, v] : tc->items()) {
      const int x = game.space.index_of(name);
      if (x < 0) fail(path + ".terminal_cost", "unknown state '" + name + "'");
      game.costs.terminal[static_cast<size_t>(x)] = require_number(v, path + ".terminal_cost");
    }
  }
  if (const json* disc = get(j, "discount")) {
    if (!disc->is_object()) fail(path + ".discount", "expected a map state -> value");
    for (const auto& [name, v] : disc->items()) {
      const int x = game.space.index_of(name);
      if (x < 0) fail(path + ".discount", "unknown state '" + name + "'");
      game.discount[static_cast<size_t>(x)] = require_number(v, path + ".discount");
    }
  }
  if (const json* st = get(j, "structure"))
    game.structure.kind = parse_structure(*st, path + ".structure");
  return game;
}

json dump_game(const MarkovGame& game) {
  json j;
  j["states"] = game.space.names;
  json absorbing = json::array();
  for (int x = 0; x < game.n_states(); ++x)
    if (game.space.is_absorbing(x)) absorbing.push_back(game.space.names[static_cast<size_t>(x)]);
  j["absorbing"] = std::move(absorbing);
  j["controls"] = json{{"u1", dump_grid(game.grid1)}, {"u2", dump_grid(game.grid2)}};
  json trans = json::array();
  for (int x = 0; x < game.n_states(); ++x) {
    for (int i = 0; i < game.n1(); ++i) {
      for (int jj = 0; jj < game.n2(); ++jj) {
        json to = json::object();
        for (const Transition& t : game.kernel.row(x, i, jj))
          to[game.space.names[static_cast<size_t>(t.target)]] = t.prob;
        trans.push_back(json{{"from", game.space.names[static_cast<size_t>(x)]},
                             {"r1", i},
                             {"r2", jj},
                             {"to", std::move(to)}});
      }
    }
  }
  j["transitions"] = std::move(trans);
  json costs = json::array();
  for (int x = 0; x < game.n_states(); ++x) {
    json matrix = json::array();
    for (int i = 0; i < game.n1(); ++i) {
      json row = json::array();
      for (int jj = 0; jj < game.n2(); ++jj) row.push_back(game.costs.run(x, i, jj));
      matrix.push_back(std::move(row));
    }
    costs.push_back(json{{"state", game.space.names[static_cast<size_t>(x)]},
                         {"matrix", std::move(matrix)}});
  }
  j["running_cost"] = std::move(costs);
  json terminal = json::object();
  json discount = json::object();
  for (int x = 0; x < game.n_states(); ++x) {
    terminal[game.space.names[static_cast<size_t>(x)]] = game.costs.terminal[static_cast<size_t>(x)];
    discount[game.space.names[static_cast<size_t>(x)]] = game.discount[static_cast<size_t>(x)];
  }
  j["terminal_cost"] = std::move(terminal);
  j["discount"] = std::move(discount);
  j["structure"] = to_string(game.structure.kind);
  return j;
}

// ---- command parameter blocks ----------------------------------------------

std::vector<SolveMode> parse_modes(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a nonempty array of mode names");
  std::vector<SolveMode> modes;
  for (const auto& e : *&j) {
    const std::string s = require_string(e, path);
    const auto m = solve_mode_from_string(s);
    if (!m) fail(path, "unknown mode '" + s + "'");
    modes.push_back(*m);
  }
  return modes;
}

json dump_modes(const std::vector<SolveMode>& modes) {
  json arr = json::array();
  for (SolveMode m : modes) arr.push_back(to_string(m));
  return arr;
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("JSON syntax: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config root must be an object");

  RunConfig c;
  if (const json* v = get(j, "version")) {
    c.version = static_cast<int>(require_integer(*v, "version"));
    if (c.version != 1) fail("version", "unsupported version (expected 1)");
  }

  const json* problem = get(j, "problem");
  if (!problem || !problem->is_object()) fail("problem", "required object");
  int sources = 0;
  if (const json* b = get(*problem, "builtin")) {
    c.builtin = require_string(*b, "problem.builtin");
    ++sources;
  }
  if (const json* g = get(*problem, "game")) {
    c.game = parse_game(*g, "problem.game");
    ++sources;
  }
  if (const json* d = get(*problem, "diffusion")) {
    c.diffusion = parse_diffusion(*d, "problem.diffusion");
    ++sources;
  }
  if (sources != 1) fail("problem", "exactly one of builtin/game/diffusion is required");

  if (const json* h = get(j, "h")) c.h = positive_number(*h, "h");

  if (const json* s = get(j, "solve")) {
    if (const json* m = get(*s, "modes")) c.solve.modes = parse_modes(*m, "solve.modes");
    if (const json* t = get(*s, "tol")) c.solve.tol = positive_number(*t, "solve.tol");
    if (const json* m = get(*s, "max_iter")) {
      c.solve.max_iter = require_integer(*m, "solve.max_iter");
      if (c.solve.max_iter < 1) fail("solve.max_iter", "must be >= 1");
    }
  }
  if (const json* s = get(j, "check")) {
    if (const json* cm = get(*s, "c_max")) c.check.c_max = positive_number(*cm, "check.c_max");
    if (const json* sc = get(*s, "sample_controls"))
      c.check.sample_controls = static_cast<int>(require_integer(*sc, "check.sample_controls"));
  }
  if (const json* s = get(j, "sweep")) {
    if (const json* hl = get(*s, "h_list")) {
      c.sweep.h_list = number_list(*hl, "sweep.h_list");
      for (double h : c.sweep.h_list)
        if (!(h > 0.0)) fail("sweep.h_list", "entries must be > 0");
    }
    if (const json* m = get(*s, "modes")) c.sweep.modes = parse_modes(*m, "sweep.modes");
    if (const json* p = get(*s, "probe_points")) {
      if (!p->is_array()) fail("sweep.probe_points", "expected an array of points");
      for (const auto& e : *p) c.sweep.probe_points.push_back(number_list(e, "sweep.probe_points"));
    }
    if (const json* t = get(*s, "tol")) c.sweep.tol = positive_number(*t, "sweep.tol");
    if (const json* m = get(*s, "max_iter")) {
      c.sweep.max_iter = require_integer(*m, "sweep.max_iter");
      if (c.sweep.max_iter < 1) fail("sweep.max_iter", "must be >= 1");
    }
  }
  if (const json* s = get(j, "simulate")) {
    if (const json* p = get(*s, "paths")) {
      c.simulate.paths = require_integer(*p, "simulate.paths");
      if (c.simulate.paths < 1) fail("simulate.paths", "must be >= 1");
    }
    if (const json* m = get(*s, "max_steps")) {
      c.simulate.max_steps = require_integer(*m, "simulate.max_steps");
      if (c.simulate.max_steps < 0) fail("simulate.max_steps", "must be >= 0");
    }
    if (const json* sd = get(*s, "seed"))
      c.simulate.seed = static_cast<std::uint64_t>(require_integer(*sd, "simulate.seed"));
    if (const json* pm = get(*s, "policy_mode")) {
      const auto m = solve_mode_from_string(require_string(*pm, "simulate.policy_mode"));
      if (!m) fail("simulate.policy_mode", "unknown mode");
      c.simulate.policy_mode = *m;
    }
    if (const json* t = get(*s, "tol")) c.simulate.tol = positive_number(*t, "simulate.tol");
    if (const json* m = get(*s, "max_iter")) {
      c.simulate.max_iter = require_integer(*m, "simulate.max_iter");
      if (c.simulate.max_iter < 1) fail("simulate.max_iter", "must be >= 1");
    }
    if (const json* sp = get(*s, "start_point"))
      c.simulate.start_point = number_list(*sp, "simulate.start_point");
    if (const json* sr = get(*s, "start_regime")) {
      c.simulate.start_regime = static_cast<int>(require_integer(*sr, "simulate.start_regime"));
      if (c.simulate.start_regime < 0) fail("simulate.start_regime", "must be >= 0");
    }
    if (const json* ss = get(*s, "start_state"))
      c.simulate.start_state = require_string(*ss, "simulate.start_state");
  }
  if (const json* o = get(j, "out_dir")) c.out_dir = require_string(*o, "out_dir");
  if (const json* w = get(j, "workers")) {
    c.workers = static_cast<int>(require_integer(*w, "workers"));
    if (c.workers < 1) fail("workers", "must be >= 1");
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string dump_config(const RunConfig& c) {
  json j;
  j["version"] = c.version;
  json problem;
  if (c.builtin) problem["builtin"] = *c.builtin;
  if (c.game) problem["game"] = dump_game(*c.game);
  if (c.diffusion) problem["diffusion"] = dump_diffusion(*c.diffusion);
  j["problem"] = std::move(problem);
  if (c.h) j["h"] = *c.h;
  j["solve"] = json{{"modes", dump_modes(c.solve.modes)},
                    {"tol", c.solve.tol},
                    {"max_iter", c.solve.max_iter}};
  j["check"] = json{{"c_max", c.check.c_max}, {"sample_controls", c.check.sample_controls}};
  {
    json s;
    s["h_list"] = c.sweep.h_list;
    s["modes"] = dump_modes(c.sweep.modes);
    s["probe_points"] = c.sweep.probe_points;
    s["tol"] = c.sweep.tol;
    s["max_iter"] = c.sweep.max_iter;
    j["sweep"] = std::move(s);
  }
  {
    json s;
    s["paths"] = c.simulate.paths;
    s["max_steps"] = c.simulate.max_steps;
    s["seed"] = c.simulate.seed;
    s["policy_mode"] = to_string(c.simulate.policy_mode);
    s["tol"] = c.simulate.tol;
    s["max_iter"] = c.simulate.max_iter;
    if (!c.simulate.start_point.empty()) s["start_point"] = c.simulate.start_point;
    s["start_regime"] = c.simulate.start_regime;
    if (!c.simulate.start_state.empty()) s["start_state"] = c.simulate.start_state;
    j["simulate"] = std::move(s);
  }
  j["out_dir"] = c.out_dir;
  j["workers"] = c.workers;
  return j.dump(2) + "\n";
}

}  // namespace zsg
