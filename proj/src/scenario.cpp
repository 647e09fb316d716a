#include "mvt/scenario.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "mvt/errors.hpp"
#include "mvt/measure_io.hpp"

namespace mvt {

namespace {

using nlohmann::json;

void allow_keys(const json& obj, const std::string& where, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) throw ConfigError(fmt::format("{}: expected an object", where));
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [key, _] : obj.items())
    if (!allowed.count(key)) throw ConfigError(fmt::format("{}: unknown key '{}'", where, key));
}

std::string path_of(const std::string& where, const std::string& key) {
  return where.empty() ? key : where + "." + key;
}

const json& required(const json& obj, const std::string& where, const char* key) {
  if (!obj.contains(key)) throw ConfigError(fmt::format("{}: missing required key", path_of(where, key)));
  return obj.at(key);
}

double as_number(const json& j, const std::string& field) {
  if (!j.is_number()) throw ConfigError(fmt::format("{}: expected a number", field));
  const double x = j.get<double>();
  if (!std::isfinite(x)) throw ConfigError(fmt::format("{}: must be finite", field));
  return x;
}

int as_int(const json& j, const std::string& field) {
  if (!j.is_number_integer()) throw ConfigError(fmt::format("{}: expected an integer", field));
  return j.get<int>();
}

std::string as_string(const json& j, const std::string& field) {
  if (!j.is_string()) throw ConfigError(fmt::format("{}: expected a string", field));
  return j.get<std::string>();
}

std::vector<double> as_numbers(const json& j, const std::string& field) {
  if (!j.is_array()) throw ConfigError(fmt::format("{}: expected an array of numbers", field));
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_number(j[i], fmt::format("{}[{}]", field, i)));
  return out;
}

double number_or(const json& obj, const std::string& where, const char* key, double fallback) {
  return obj.contains(key) ? as_number(obj.at(key), path_of(where, key)) : fallback;
}

Point as_point(const json& j, const std::string& field, int dim) {
  const auto xs = as_numbers(j, field);
  if (static_cast<int>(xs.size()) != dim)
    throw ConfigError(fmt::format("{}: expected {} coordinate(s), got {}", field, dim, xs.size()));
  Point p;
  for (int i = 0; i < dim; ++i) p[i] = xs[static_cast<std::size_t>(i)];
  return p;
}

Domain parse_domain(const json& j) {
  allow_keys(j, "domain", {"kind", "dim"});
  const std::string kind = as_string(required(j, "domain", "kind"), "domain.kind");
  const int dim = as_int(required(j, "domain", "dim"), "domain.dim");
  DomainKind k;
  if (kind == "euclidean")
    k = DomainKind::euclidean;
  else if (kind == "torus")
    k = DomainKind::torus;
  else
    throw ConfigError(fmt::format("domain.kind: expected 'euclidean' or 'torus', got '{}'", kind));
  try {
    return make_domain(k, dim);
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("domain.dim: {}", e.what()));
  }
}

std::pair<std::string, std::vector<double>> parse_named(const json& j, const std::string& where) {
  allow_keys(j, where, {"name", "params"});
  std::vector<double> params;
  if (j.contains("params")) params = as_numbers(j.at("params"), where + ".params");
  return {as_string(required(j, where, "name"), where + ".name"), params};
}

SolverConfig parse_solver(const json& j) {
  allow_keys(j, "solver",
             {"delta", "delta_relative", "quad_nodes", "picard_tol", "picard_max_iter", "flow_step_h",
              "tv_blowup_threshold", "lp_blowup_threshold", "dilation", "dilation_c", "max_step",
              "contraction_target", "exec"});
  SolverConfig c;
  c.delta = number_or(j, "solver", "delta", c.delta);
  c.delta_relative = number_or(j, "solver", "delta_relative", c.delta_relative);
  if (j.contains("quad_nodes")) c.quad_nodes = as_int(j.at("quad_nodes"), "solver.quad_nodes");
  c.picard_tol = number_or(j, "solver", "picard_tol", c.picard_tol);
  if (j.contains("picard_max_iter")) c.picard_max_iter = as_int(j.at("picard_max_iter"), "solver.picard_max_iter");
  c.flow_step_h = number_or(j, "solver", "flow_step_h", c.flow_step_h);
  c.tv_blowup_threshold = number_or(j, "solver", "tv_blowup_threshold", c.tv_blowup_threshold);
  c.lp_blowup_threshold = number_or(j, "solver", "lp_blowup_threshold", c.lp_blowup_threshold);
  c.max_step = number_or(j, "solver", "max_step", c.max_step);
  c.contraction_target = number_or(j, "solver", "contraction_target", c.contraction_target);
  if (j.contains("dilation")) {
    const auto mode = as_string(j.at("dilation"), "solver.dilation");
    if (mode == "none")
      c.dilation_mode = DilationMode::none;
    else if (mode == "auto")
      c.dilation_mode = DilationMode::automatic;
    else if (mode == "fixed")
      c.dilation_mode = DilationMode::fixed;
    else
      throw ConfigError(fmt::format("solver.dilation: expected none, auto or fixed, got '{}'", mode));
  }
  if (j.contains("dilation_c")) {
    if (c.dilation_mode != DilationMode::fixed)
      throw ConfigError("solver.dilation_c: only valid with \"dilation\": \"fixed\"");
    c.dilation_c = as_number(j.at("dilation_c"), "solver.dilation_c");
  }
  if (j.contains("exec")) {
    const auto e = as_string(j.at("exec"), "solver.exec");
    if (e == "serial")
      c.exec = Exec::serial;
    else if (e == "parallel")
      c.exec = Exec::parallel;
    else
      throw ConfigError(fmt::format("solver.exec: expected serial or parallel, got '{}'", e));
  }
  c.validate();
  return c;
}

GridDensity parse_density_grid(const json& j, const Domain& dom, int* quantize_cells) {
  allow_keys(j, "density", {"cells", "box_min", "box_max", "p", "quantize_cells"});
  const int cells = as_int(required(j, "density", "cells"), "density.cells");
  Point lo, hi;
  if (dom.kind == DomainKind::euclidean) {
    lo = as_point(required(j, "density", "box_min"), "density.box_min", dom.dim);
    hi = as_point(required(j, "density", "box_max"), "density.box_max", dom.dim);
  } else if (j.contains("box_min") || j.contains("box_max")) {
    throw ConfigError("density: box_min/box_max are fixed to the unit cube on the torus");
  }
  double p = 2.0;
  if (j.contains("p")) {
    if (j.at("p").is_string() && j.at("p").get<std::string>() == "inf")
      p = std::numeric_limits<double>::infinity();
    else
      p = as_number(j.at("p"), "density.p");
  }
  *quantize_cells = cells;
  if (j.contains("quantize_cells")) *quantize_cells = as_int(j.at("quantize_cells"), "density.quantize_cells");
  if (*quantize_cells < 1) throw ConfigError("density.quantize_cells: must be >= 1");
  try {
    return make_grid(dom, cells, lo, hi, p);
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("density: {}", e.what()));
  }
}

DiscreteSignedMeasure random_atoms(const Domain& dom, int count, double spread, bool positive,
                                   std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(dom.kind == DomainKind::torus ? 0.0 : -spread,
                                               dom.kind == DomainKind::torus ? 1.0 : spread);
  std::uniform_real_distribution<double> weight(positive ? 0.05 : -1.0, 1.0);
  std::vector<Atom> atoms(static_cast<std::size_t>(count));
  for (auto& a : atoms) {
    for (int i = 0; i < dom.dim; ++i) a.point[i] = coord(rng);
    a.weight = weight(rng);
  }
  return DiscreteSignedMeasure(dom, std::move(atoms));
}

void parse_initial(const json& j, const std::filesystem::path& base, Scenario& sc,
                   const json* density_json) {
  if (!j.is_object()) throw ConfigError("initial: expected an object");
  const std::string type = as_string(required(j, "initial", "type"), "initial.type");
  const Domain& dom = sc.domain;
  auto need_density = [&] {
    if (!density_json) throw ConfigError(fmt::format("initial.type '{}' needs a 'density' section", type));
  };
  auto no_density = [&] {
    if (density_json)
      throw ConfigError(fmt::format("initial.type '{}' is a particle measure; remove the 'density' section", type));
  };

  if (type == "atoms") {
    allow_keys(j, "initial", {"type", "points", "weights"});
    no_density();
    const auto& pts = required(j, "initial", "points");
    const auto ws = as_numbers(required(j, "initial", "weights"), "initial.weights");
    if (!pts.is_array() || pts.size() != ws.size())
      throw ConfigError("initial.points: expected an array with one point per weight");
    std::vector<Atom> atoms;
    for (std::size_t i = 0; i < ws.size(); ++i)
      atoms.push_back({as_point(pts[i], fmt::format("initial.points[{}]", i), dom.dim), ws[i]});
    sc.nu = DiscreteSignedMeasure(dom, std::move(atoms));
    return;
  }
  if (type == "random") {
    allow_keys(j, "initial", {"type", "atoms", "spread", "positive", "mass"});
    no_density();
    const int n = as_int(required(j, "initial", "atoms"), "initial.atoms");
    if (n < 1) throw ConfigError("initial.atoms: must be >= 1");
    const double spread = number_or(j, "initial", "spread", 1.0);
    bool positive = true;
    if (j.contains("positive")) {
      if (!j.at("positive").is_boolean()) throw ConfigError("initial.positive: expected true or false");
      positive = j.at("positive").get<bool>();
    }
    sc.nu = random_atoms(dom, n, spread, positive, sc.seed);
    if (j.contains("mass")) {
      const double m = as_number(j.at("mass"), "initial.mass");
      if (!(m > 0.0) || !positive) throw ConfigError("initial.mass: needs positive atoms and a positive mass");
      sc.nu = scale(m / sc.nu.mass(), sc.nu);
    }
    return;
  }
  if (type == "csv") {
    allow_keys(j, "initial", {"type", "path"});
    no_density();
    const auto p = base / as_string(required(j, "initial", "path"), "initial.path");
    if (!std::filesystem::exists(p)) throw ConfigError(fmt::format("initial.path: file not found: {}", p.string()));
    sc.nu = read_measure_csv(p, dom.kind);
    if (sc.nu.domain() != dom && !sc.nu.empty())
      throw ConfigError(fmt::format("initial.path: measure dimension {} does not match domain.dim {}",
                                    sc.nu.domain().dim, dom.dim));
    return;
  }
  if (type == "gaussian" || type == "uniform" || type == "grid_csv") {
    need_density();
    int qcells = 0;
    GridDensity g = parse_density_grid(*density_json, dom, &qcells);
    if (type == "gaussian") {
      allow_keys(j, "initial", {"type", "center", "sigma", "mass"});
      const Point c = as_point(required(j, "initial", "center"), "initial.center", dom.dim);
      const double sigma = as_number(required(j, "initial", "sigma"), "initial.sigma");
      const double mass = number_or(j, "initial", "mass", 1.0);
      if (!(sigma > 0.0)) throw ConfigError("initial.sigma: must be positive");
      const double norm = mass / std::pow(2.0 * std::numbers::pi * sigma * sigma, dom.dim / 2.0);
      for (std::size_t k = 0; k < g.values.size(); ++k) {
        const double r2 = std::pow(distance(dom, c, g.cell_center(k)), 2);
        g.values[k] = norm * std::exp(-r2 / (2.0 * sigma * sigma));
      }
    } else if (type == "uniform") {
      allow_keys(j, "initial", {"type", "mass"});
      const double mass = number_or(j, "initial", "mass", 1.0);
      std::fill(g.values.begin(), g.values.end(), mass / g.box_volume());
    } else {
      allow_keys(j, "initial", {"type", "path"});
      const auto p = base / as_string(required(j, "initial", "path"), "initial.path");
      if (!std::filesystem::exists(p)) throw ConfigError(fmt::format("initial.path: file not found: {}", p.string()));
      const double p_exp = g.p;
      g = read_grid_csv(p, dom.kind);
      g.p = p_exp;
      if (g.domain != dom) throw ConfigError("initial.path: grid dimension does not match domain.dim");
    }
    for (double x : g.values)
      if (x < 0.0) throw ConfigError("initial: densities must be nonnegative");
    sc.nu = quantize(g, qcells);
    sc.density = std::move(g);
    return;
  }
  throw ConfigError(fmt::format("initial.type: unknown type '{}'", type));
}

VerifyOptions parse_verify(const json& j, int dim) {
  allow_keys(j, "verify", {"suites", "perturb_scale", "perturb_shift", "lp_p"});
  VerifyOptions v;
  if (j.contains("suites")) {
    const auto& s = j.at("suites");
    if (!s.is_array()) throw ConfigError("verify.suites: expected an array of names");
    for (std::size_t i = 0; i < s.size(); ++i) {
      const auto name = as_string(s[i], fmt::format("verify.suites[{}]", i));
      if (name != "positivity" && name != "lp" && name != "dependence")
        throw ConfigError(fmt::format("verify.suites[{}]: unknown suite '{}'", i, name));
      v.suites.push_back(name);
    }
  }
  v.perturb_scale = number_or(j, "verify", "perturb_scale", 1.0);
  if (j.contains("perturb_shift")) {
    v.perturb_shift = as_numbers(j.at("perturb_shift"), "verify.perturb_shift");
    if (static_cast<int>(v.perturb_shift.size()) != dim)
      throw ConfigError("verify.perturb_shift: expected one entry per dimension");
  }
  v.lp_p = number_or(j, "verify", "lp_p", 0.0);
  return v;
}

}  // namespace

Problem Scenario::problem() const {
  Problem p;
  p.name = name;
  ReactionContext ctx{domain, density ? density->box_volume() : 1.0};
  p.spec = builtin_reaction(reaction_name, reaction_params, ctx);
  p.field = make_field(field_name, field_params, domain);
  p.nu = nu;
  p.density = density;
  p.t0 = t0;
  p.horizon = horizon;
  return p;
}

DiscreteSignedMeasure Scenario::perturbed_initial() const {
  std::vector<Atom> atoms(nu.atoms().begin(), nu.atoms().end());
  for (auto& a : atoms) {
    for (std::size_t i = 0; i < verify.perturb_shift.size(); ++i)
      a.point[static_cast<int>(i)] += verify.perturb_shift[i];
    a.weight *= verify.perturb_scale;
  }
  return DiscreteSignedMeasure(domain, std::move(atoms));
}

Scenario parse_scenario(const std::string& text, const std::filesystem::path& base_dir,
                        std::optional<std::uint64_t> seed_override) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("malformed JSON: {}", e.what()));
  }
  allow_keys(j, "", {"name", "seed", "domain", "field", "reaction", "initial", "t0", "horizon", "solver",
                     "density", "output", "verify"});
  Scenario sc;
  sc.name = as_string(required(j, "", "name"), "name");
  if (sc.name.empty() || sc.name.find_first_of("/\\") != std::string::npos || sc.name == "." || sc.name == "..")
    throw ConfigError("name: must be a plain directory name");
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) throw ConfigError("seed: expected a nonnegative integer");
    sc.seed = j.at("seed").get<std::uint64_t>();
  }
  if (seed_override) sc.seed = *seed_override;
  sc.domain = parse_domain(required(j, "", "domain"));
  std::tie(sc.field_name, sc.field_params) = parse_named(required(j, "", "field"), "field");
  std::tie(sc.reaction_name, sc.reaction_params) = parse_named(required(j, "", "reaction"), "reaction");
  sc.t0 = number_or(j, "", "t0", 0.0);
  sc.horizon = as_number(required(j, "", "horizon"), "horizon");
  if (!(sc.horizon > sc.t0)) throw ConfigError("horizon: must exceed t0");
  if (j.contains("solver")) sc.solver = parse_solver(j.at("solver"));
  parse_initial(required(j, "", "initial"), base_dir, sc, j.contains("density") ? &j.at("density") : nullptr);
  if (j.contains("output")) {
    allow_keys(j.at("output"), "output", {"snapshots"});
    if (j.at("output").contains("snapshots"))
      sc.snapshots = as_int(j.at("output").at("snapshots"), "output.snapshots");
    if (sc.snapshots < 0) throw ConfigError("output.snapshots: must be >= 0");
  }
  if (j.contains("verify")) sc.verify = parse_verify(j.at("verify"), sc.domain.dim);

  // surface field/reaction problems as config errors with their section name
  Problem pr;
  try {
    pr = sc.problem();
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("field/reaction: {}", e.what()));
  }
  if (sc.density && !pr.spec.density_compatible())
    throw ConfigError(fmt::format("reaction '{}' cannot act on densities; remove the 'density' section",
                                  sc.reaction_name));
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path, std::optional<std::uint64_t> seed_override) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config file {}", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_scenario(ss.str(), path.parent_path(), seed_override);
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

std::vector<std::filesystem::path> scenario_files(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> out;
  if (!std::filesystem::is_directory(dir))
    throw ConfigError(fmt::format("scenario directory not found: {}", dir.string()));
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".json") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace mvt
