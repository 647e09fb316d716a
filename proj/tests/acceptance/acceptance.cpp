// Acceptance suite: one PASS/FAIL line per criterion, tolerances pinned below.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include <fmt/core.h>

#include "generators.hpp"
#include "mvt/flat_metric.hpp"
#include "mvt/flow.hpp"
#include "mvt/invariance.hpp"
#include "mvt/mild_solver.hpp"
#include "mvt/scenario.hpp"
#include "mvt/transport.hpp"

using namespace mvt;
using mvt::testing::Gen;
namespace fs = std::filesystem;

namespace {

constexpr double kOracleTol = 1e-6;
constexpr double kTvTol = 1e-8;
constexpr double kProductSlack = 1e-9;
constexpr double kOrderLo = 12.0, kOrderHi = 20.0;
constexpr double kLipSlack = 1.001;
constexpr double kJacobianRel = 1e-4;
constexpr double kJacobianExact = 1e-6;
constexpr double kOperatorSlack = 1.001;
constexpr double kTimeLipSlack = 1.01;
constexpr double kContraction = 0.6;
constexpr double kMassTol = 1e-4;
constexpr double kBlowupRel = 0.05;
constexpr double kDilationTol = 1e-6;
constexpr double kNegRel = 1e-8;
constexpr double kScalingTol = 1e-3;
constexpr double kRefineFactor = 2.0;
constexpr double kWeakSlack = 1e-3;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* title;
  double limit_s;
  std::function<Outcome()> run;
};

Point pt(double x, double y = 0.0) {
  Point p;
  p[0] = x;
  p[1] = y;
  return p;
}

double gap(const Domain& d, const Point& a, const Point& b) { return distance(d, a, b); }

Scenario scenario(const std::string& name) { return load_scenario(fs::path(MVT_SCENARIO_DIR) / (name + ".json")); }

DiscreteSignedMeasure unit_mass_atoms() {
  return testing::atoms1d({{-0.5, 0.25}, {0.2, 0.25}, {0.9, 0.5}});
}

Outcome c01_oracle() {
  Gen g(101);
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const Domain d = i % 2 == 0 ? testing::line() : testing::plane();
    const auto mu = g.measure(d, 6);
    worst = std::max(worst, std::abs(fm_norm(mu).value - fm_norm_oracle(mu)));
  }
  return {worst <= kOracleTol, fmt::format("max |simplex - oracle| = {:.3g} (tol {:g})", worst, kOracleTol)};
}

Outcome c02_tv() {
  Gen g(102);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Domain d = i % 3 == 0 ? make_domain(DomainKind::torus, 2) : (i % 3 == 1 ? testing::line() : testing::plane());
    const auto mu = g.measure(d, 20, true);
    worst = std::max(worst, std::abs(fm_norm(mu).value - tv_norm(mu)));
  }
  return {worst <= kTvTol, fmt::format("max |fm - tv| = {:.3g} (tol {:g})", worst, kTvTol)};
}

Outcome c03_product() {
  Gen g(103);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Domain d = i % 2 == 0 ? testing::line() : testing::plane();
    const auto mu = g.measure(d, 10);
    const auto fn = g.bl_function(d);
    const double rhs = 2.0 * fn.fm_norm() * fm_norm(mu).value;
    if (rhs > 0) worst = std::max(worst, fm_norm(multiply_by_function(fn, mu)).value / rhs);
  }
  return {worst <= 1.0 + kProductSlack, fmt::format("max lhs/rhs = {:.6f}", worst)};
}

Outcome c04_order() {
  // composed flow s -> m -> t against the exact flow s -> t
  auto discrepancy = [](const VelocityField& v, const Point& x, const Point& exact, double h) {
    const Point y = advect_point(v, 0.7, 1.5, advect_point(v, 0.0, 0.7, x, h), h);
    return distance(v.domain, y, exact);
  };
  const auto lin = make_field("linear", {0.9}, testing::line());
  const auto rot = make_field("rotation2d", {1.0}, testing::plane());
  const Point x = pt(1.0, 0.5);
  const Point lin_exact = pt(std::exp(0.9 * 1.5));
  const double th = 1.5;
  const Point rot_exact = pt(std::cos(th) * x[0] - std::sin(th) * x[1], std::sin(th) * x[0] + std::cos(th) * x[1]);
  bool ok = true;
  std::string detail;
  for (const auto& [name, v, x0, ex] : {std::tuple{"linear", &lin, pt(1.0), lin_exact}, std::tuple{"rotation", &rot, x, rot_exact}}) {
    const double e1 = discrepancy(*v, x0, ex, 0.1);
    const double e2 = discrepancy(*v, x0, ex, 0.05);
    const double f = e1 / e2;
    ok = ok && f >= kOrderLo && f <= kOrderHi;
    detail += fmt::format("{}: err(h=0.1)={:.3g} C={:.3g} factor={:.2f}; ", name, e1, e1 / 1e-4, f);
  }
  detail += fmt::format("band [{:g}, {:g}]", kOrderLo, kOrderHi);
  return {ok, detail};
}

Outcome c05_lipschitz() {
  Gen g(105);
  const Domain t2 = make_domain(DomainKind::torus, 2);
  const auto v = make_field("shear", {0.4}, t2);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Point x = g.point(t2), y = g.point(t2);
    const double s = g.uniform(0.0, 0.5), t = s + g.uniform(0.0, 1.0);
    const double dxy = gap(t2, x, y);
    if (dxy < 1e-9) continue;
    const double q = gap(t2, advect_point(v, s, t, x, 1e-2), advect_point(v, s, t, y, 1e-2)) / dxy;
    worst = std::max(worst, q / lipschitz_bound(v, s, t));
  }
  return {worst <= kLipSlack, fmt::format("max quotient / L^v = {:.6f} (limit {:g})", worst, kLipSlack)};
}

Outcome c06_jacobian() {
  Gen g(106);
  const Domain t2 = make_domain(DomainKind::torus, 2);
  const std::vector<VelocityField> fields = {make_field("linear", {0.3}, testing::plane()),
                                             make_field("time_oscillating", {0.25, 3.0}, t2),
                                             make_field("shear", {0.5}, t2)};
  double worst = 0.0;  // relative excursion outside the band
  for (int i = 0; i < 300; ++i) {
    const auto& v = fields[static_cast<std::size_t>(i % 3)];
    const Point x = g.point(v.domain, 1.5);
    const double s = g.uniform(0.0, 1.0), t = s + g.uniform(0.0, 1.0);
    const double det = jacobian_det(v, s, t, x, 1e-2);
    const auto band = jacobian_band(v, s, t);
    worst = std::max({worst, (band.lower - det) / band.lower, (det - band.upper) / band.upper});
  }
  const double a = 0.7, t = 1.3;
  const double err = std::abs(jacobian_det(make_field("linear", {a}, testing::line()), 0.0, t, pt(0.4), 1e-2) - std::exp(a * t));
  return {worst <= kJacobianRel && err <= kJacobianExact,
          fmt::format("max excursion outside band = {:.3g} (tol {:g}); |det - e^(at)| = {:.3g} (tol {:g})",
                      std::max(worst, 0.0), kJacobianRel, err, kJacobianExact)};
}

Outcome c07_operator() {
  Gen g(107);
  const std::vector<VelocityField> fields = {make_field("linear", {0.4}, testing::plane()),
                                             make_field("rotation2d", {1.0}, testing::plane()),
                                             make_field("linear", {-0.4}, testing::plane())};
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const auto& v = fields[static_cast<std::size_t>(i % 3)];
    const auto mu = g.measure(v.domain, 8);
    const double n = fm_norm(mu).value;
    if (n <= 0) continue;
    worst = std::max(worst, fm_norm(pushforward_measure(v, 0.0, 1.0, mu)).value / (lipschitz_bound(v, 0.0, 1.0) * n));
  }
  return {worst <= kOperatorSlack, fmt::format("max fm(P mu) / (L^v fm(mu)) = {:.6f} (limit {:g})", worst, kOperatorSlack)};
}

Outcome c08_time_lipschitz() {
  Gen g(108);
  const Domain t2 = make_domain(DomainKind::torus, 2);
  const std::vector<VelocityField> fields = {make_field("shear", {0.4}, t2),
                                             make_field("time_oscillating", {0.25, 3.0}, t2)};
  const double horizon = 2.0;
  double worst = 0.0, worst_sup = 0.0;  // against C' = L^v sup|v| and against sup|v| alone
  for (const auto& v : fields) {
    const double sup = flow_displacement_bound(v, 0.0, horizon);
    const double c = lipschitz_bound(v, 0.0, horizon) * sup;
    for (int k = 0; k < 3; ++k) {
      const auto mu = g.measure(t2, 6);
      std::vector<DiscreteSignedMeasure> at;
      for (int i = 0; i <= 8; ++i) at.push_back(pushforward_measure(v, 0.0, 0.25 * i, mu, 1e-3));
      for (int i = 0; i <= 8; ++i)
        for (int j = i + 1; j <= 8; ++j) {
          const double q = fm_distance(at[i], at[j]) / (tv_norm(mu) * 0.25 * (j - i));
          worst = std::max(worst, q / c);
          worst_sup = std::max(worst_sup, q / sup);
        }
    }
  }
  return {worst <= kTimeLipSlack, fmt::format("max fm / (C' |mu| |t-s|) = {:.4f} (limit {:g}); with sup|v| alone {:.4f}",
                                              worst, kTimeLipSlack, worst_sup)};
}

Outcome c09_contraction() {
  double ratio = 0.0, residual_rel = 0.0;
  int intervals = 0;
  for (const auto& path : scenario_files(MVT_SCENARIO_DIR)) {
    const auto sc = load_scenario(path);
    const auto pr = sc.problem();
    const auto tr = solve_maximal(pr.spec, pr.field, pr.nu, pr.t0, pr.horizon, sc.solver, pr.density);
    for (const auto& info : tr.intervals) {
      ratio = std::max(ratio, info.contraction_ratio);
      residual_rel = std::max(residual_rel, info.residual / (2 * sc.solver.picard_tol));
      ++intervals;
    }
  }
  return {ratio <= kContraction && residual_rel <= 1.0,
          fmt::format("{} intervals: max ratio = {:.4f} (limit {:g}); max residual / (2 tol) = {:.3g}", intervals, ratio,
                      kContraction, residual_rel)};
}

Outcome c10_mass_laws() {
  const Domain line = testing::line();
  const ReactionContext ctx{line};
  SolverConfig cfg;
  cfg.quad_nodes = 65;
  const auto nu = unit_mass_atoms();
  const double m0 = nu.mass();

  const double c = 0.5;
  const auto lin = solve_maximal(builtin_reaction("linear_rate", {c}, ctx), zero_field(line), nu, 0.0, 2.0, cfg);
  double lin_err = 0.0;
  for (std::size_t i = 0; i < lin.times.size(); ++i)
    lin_err = std::max(lin_err, std::abs(lin.measures[i].mass() - m0 * std::exp(c * lin.times[i])));

  const double r = 1.0, k = 2.0;
  const auto logi = solve_maximal(builtin_reaction("logistic", {r, k}, ctx), make_field("constant", {0.3}, line), nu,
                                  0.0, 3.0, cfg);
  double log_err = 0.0;
  for (std::size_t i = 0; i < logi.times.size(); ++i) {
    const double e = std::exp(r * logi.times[i]);
    log_err = std::max(log_err, std::abs(logi.measures[i].mass() - k * m0 * e / (k + m0 * (e - 1.0))));
  }

  const auto ric = scenario("riccati_blowup");
  const auto pr = ric.problem();
  const auto rt = solve_maximal(pr.spec, pr.field, pr.nu, pr.t0, pr.horizon, ric.solver);
  const double t_star = 1.0 / (ric.reaction_params[0] * pr.nu.mass());
  const double rel = std::abs(rt.blowup_time - t_star) / t_star;
  return {lin_err <= kMassTol * m0 && log_err <= kMassTol * m0 && rt.blowup && rel <= kBlowupRel,
          fmt::format("linear err = {:.3g}, logistic err = {:.3g} (tol {:g}); riccati blowup={} at {:.5f} vs {:.5f} "
                      "(rel {:.3g}, tol {:g})",
                      lin_err, log_err, kMassTol * m0, rt.blowup, rt.blowup_time, t_star, rel, kBlowupRel)};
}

Outcome c11_dilation() {
  const Domain line = testing::line();
  const ReactionContext ctx{line};
  Gen g(111);
  double worst = 0.0;
  int shared_min = 1 << 30;
  for (int i = 0; i < 4; ++i) {
    const auto nu = g.measure(line, 4, true);
    const auto spec = builtin_reaction("logistic", {g.uniform(0.2, 1.5), g.uniform(1.0, 3.0)}, ctx);
    const auto v = make_field("linear", {g.uniform(-0.3, 0.3)}, line);
    SolverConfig plain;
    plain.dilation_mode = DilationMode::none;
    plain.max_step = 0.25;
    plain.quad_nodes = 129;
    SolverConfig dil = plain;
    dil.dilation_mode = DilationMode::fixed;
    dil.dilation_c = g.uniform(0.5, 2.0);
    const auto a = solve_maximal(spec, v, nu, 0.0, 1.0, plain);
    const auto b = solve_maximal(spec, v, nu, 0.0, 1.0, dil);
    int shared = 0;
    for (std::size_t k = 0, j = 0; k < a.times.size(); ++k) {
      while (j < b.times.size() && b.times[j] < a.times[k] - 1e-12) ++j;
      if (j < b.times.size() && std::abs(b.times[j] - a.times[k]) <= 1e-12) {
        worst = std::max(worst, fm_distance(a.measures[k], b.measures[j]));
        ++shared;
      }
    }
    shared_min = std::min(shared_min, shared);
  }
  return {worst <= kDilationTol && shared_min >= 5,
          fmt::format("sup_t fm(undilated, dilated) = {:.3g} over >= {} shared times (tol {:g})", worst, shared_min,
                      kDilationTol)};
}

Outcome c12_positivity() {
  bool ok = true;
  std::string detail;
  for (const char* name : {"death_decay", "shear_logistic"}) {
    const auto sc = scenario(name);
    const auto r = check_positivity(sc.problem(), sc.solver);
    const double rel = r.observed[0] / tv_norm(sc.nu);
    ok = ok && r.passed && rel <= kNegRel;
    detail += fmt::format("{}: max neg / |nu| = {:.3g}; ", name, rel);
  }
  return {ok, detail + fmt::format("tol {:g}", kNegRel)};
}

Outcome c13_dependence() {
  bool ok = true;
  std::string detail;
  for (const char* name : {"rotation_zero", "shear_logistic", "death_decay"}) {
    const auto sc = scenario(name);
    const auto r = check_continuous_dependence(sc.problem(), sc.nu, sc.perturbed_initial(), sc.solver);
    const auto& ts = r.series.at("t");
    double worst = 0.0;  // t0 itself gives 1/1
    for (std::size_t i = 0; i < r.observed.size(); ++i)
      if (ts[i] > sc.t0) worst = std::max(worst, r.observed[i] / r.bound[i]);
    ok = ok && r.passed;
    detail += fmt::format("{}: max ratio/bound for t > t0 = {:.4f}; ", name, worst);
  }
  const auto sc = scenario("linear_growth");
  const auto r = check_continuous_dependence(sc.problem(), sc.nu, sc.perturbed_initial(), sc.solver);
  const auto& ts = r.series.at("t");
  const double c = sc.reaction_params[0];
  double err = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i)
    err = std::max(err, std::abs(r.observed[i] - std::exp(c * (ts[i] - sc.t0))) / std::exp(c * (ts[i] - sc.t0)));
  ok = ok && r.passed && err <= kScalingTol;
  return {ok, detail + fmt::format("linear_growth scaling: rel err vs e^(ct) = {:.3g} (tol {:g})", err, kScalingTol)};
}

// Largest |computed - closed form| of the L^2 norm along a check_lp_invariance run.
double lp_error(const CheckReport& r, const std::function<double(double)>& exact) {
  const auto& ts = r.series.at("t");
  const auto& ns = r.series.at("lp_norm");
  double e = 0.0;
  for (std::size_t k = 0; k < ts.size(); ++k) e = std::max(e, std::abs(ns[k] - exact(ts[k])));
  return e;
}

Problem density_problem(const std::string& reaction, std::vector<double> params, VelocityField v, GridDensity phi,
                        double horizon) {
  Problem pr;
  pr.name = reaction;
  pr.spec = builtin_reaction(reaction, params, ReactionContext{phi.domain, phi.box_volume()});
  pr.field = std::move(v);
  pr.nu = quantize(phi, phi.domain.dim == 1 ? 32 : 8);
  pr.density = std::move(phi);
  pr.horizon = horizon;
  return pr;
}

Outcome c14_lp() {
  bool ok = true;
  std::string detail;
  for (const char* name : {"source_density", "rotation_density", "contract_density"}) {
    const auto sc = scenario(name);
    const auto r = check_lp_invariance(sc.problem(), 2.0, sc.solver);
    double slack = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < r.observed.size(); ++i) slack = std::min(slack, r.bound[i] + r.tolerance - r.observed[i]);
    ok = ok && r.passed;
    detail += fmt::format("{}: min slack = {:.3g}; ", name, slack);
  }

  // refinement against closed forms, both pairs past the under-resolved range
  SolverConfig cfg;
  cfg.quad_nodes = 9;
  auto rotation_err = [&](int cells) {
    const auto plane = testing::plane();
    auto phi = grid_from_function(plane, cells, pt(-2, -2), pt(2, 2), 2.0,
                                  [](const Point& x) { return std::exp(-(x[0] * x[0] + x[1] * x[1]) / 0.18); });
    const double n0 = phi.lp_norm();
    const auto r = check_lp_invariance(density_problem("zero", {}, make_field("rotation2d", {1.0}, plane), phi, 1.0), 2.0, cfg);
    return lp_error(r, [&](double) { return n0; });
  };
  auto linear_err = [&](int cells) {
    const auto line = testing::line();
    const double a = 0.5;
    auto phi = grid_from_function(line, cells, pt(-3), pt(3), 2.0, [](const Point& x) { return std::exp(-x[0] * x[0]); });
    const double n0 = phi.lp_norm();
    const auto r = check_lp_invariance(density_problem("zero", {}, make_field("linear", {-a}, line), phi, 1.0), 2.0, cfg);
    return lp_error(r, [&](double t) { return n0 * std::exp(a * t / 2); });
  };
  const double r1 = rotation_err(48), r2 = rotation_err(96);
  const double l1 = linear_err(128), l2 = linear_err(256);
  ok = ok && r1 >= kRefineFactor * r2 && l1 >= kRefineFactor * l2;
  detail += fmt::format("refinement: rotation {:.3g} -> {:.3g} (x{:.1f}), linear {:.3g} -> {:.3g} (x{:.1f}), need x{:g}",
                        r1, r2, r1 / r2, l1, l2, l1 / l2, kRefineFactor);
  return {ok, detail};
}

Outcome c15_weak_limit() {
  std::vector<double> sig;
  for (int n = 1; n <= 1000; ++n) sig.push_back(0.5 * (1.0 + 1.0 / n));
  bool ok = true;
  std::string detail;
  for (double p : {2.0, std::numeric_limits<double>::infinity()}) {
    const auto r = weak_limit_experiment(p, sig, 0.5);
    const double slack = r.bound[0] - r.observed[0];
    ok = ok && r.passed && slack >= -kWeakSlack;
    detail += fmt::format("p={}: slack = {:.3g}; ", p, slack);
  }
  std::vector<double> conc;
  for (int n = 1; n <= 100; ++n) conc.push_back(1.0 / n);
  const auto r = weak_limit_experiment(1.0, conc, 0.0);
  const auto& sup = r.series.at("sup_norm");
  const auto& fm = r.series.at("fm_to_limit");
  ok = ok && r.passed && fm.back() <= 1e-2 && sup.back() >= 30.0;
  return {ok, detail + fmt::format("p=1 counterexample: fm(f_100, delta_0) = {:.3g}, sup f_100 = {:.3g}", fm.back(), sup.back())};
}

Outcome c16_determinism() {
  const auto dir = fs::temp_directory_path() / ("mvt_acceptance_" + std::to_string(::getpid()));
  const auto config = fs::path(MVT_SCENARIO_DIR) / "shear_logistic.json";
  std::string bytes[2];
  bool ran = true;
  for (int i = 0; i < 2; ++i) {
    const auto out = dir / std::to_string(i);
    fs::create_directories(out);
    const auto cmd = fmt::format("\"{}\" simulate --config \"{}\" --out \"{}\" > /dev/null", MVT_BINARY, config.string(),
                                 out.string());
    ran = ran && std::system(cmd.c_str()) == 0;
    std::ifstream in(out / "shear_logistic" / "trajectory.csv", std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    bytes[i] = ss.str();
  }
  fs::remove_all(dir);
  const bool same = ran && !bytes[0].empty() && bytes[0] == bytes[1];
  return {same, fmt::format("exit ok={}, {} bytes, identical={}", ran, bytes[0].size(), same)};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "flat-norm oracle equivalence", 5, c01_oracle},
      {2, "fm equals tv on positive measures", 2, c02_tv},
      {3, "product bound", 5, c03_product},
      {4, "flow semigroup and RK4 order", 2, c04_order},
      {5, "Lipschitz flow bound", 2, c05_lipschitz},
      {6, "Jacobian band", 1, c06_jacobian},
      {7, "transport operator norm", 10, c07_operator},
      {8, "time-Lipschitz motions", 10, c08_time_lipschitz},
      {9, "Picard contraction and residual", 30, c09_contraction},
      {10, "mass laws", 30, c10_mass_laws},
      {11, "dilation equivalence", 20, c11_dilation},
      {12, "positivity", 20, c12_positivity},
      {13, "continuous dependence", 30, c13_dependence},
      {14, "Lp propagation", 60, c14_lp},
      {15, "weak-limit lower semicontinuity", 20, c15_weak_limit},
      {16, "determinism", 10, c16_determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, fmt::format("exception: {}", e.what())};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool pass = o.pass && secs <= c.limit_s;
    failed += pass ? 0 : 1;
    fmt::print("criterion {:2d} {} {}: {} [{:.2f}s, limit {:g}s]\n", c.id, pass ? "PASS" : "FAIL", c.title, o.detail,
               secs, c.limit_s);
    std::fflush(stdout);
  }
  fmt::print("acceptance: {} of {} passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
