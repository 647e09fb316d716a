#include <doctest.h>

#include <cmath>
#include <numbers>

#include "generators.hpp"
#include "mvt/errors.hpp"
#include "mvt/invariance.hpp"

using namespace mvt;
using mvt::testing::atoms1d;

namespace {

Point pt(double x, double y = 0.0) {
  Point p;
  p[0] = x;
  p[1] = y;
  return p;
}

Problem problem(const std::string& reaction, std::vector<double> params, VelocityField v,
                DiscreteSignedMeasure nu, double horizon) {
  Problem pr;
  pr.name = reaction;
  pr.spec = builtin_reaction(reaction, params, ReactionContext{nu.domain()});
  pr.field = std::move(v);
  pr.nu = std::move(nu);
  pr.horizon = horizon;
  return pr;
}

Problem density_problem(const std::string& reaction, std::vector<double> params, VelocityField v,
                        GridDensity phi, double horizon) {
  Problem pr;
  pr.name = reaction;
  pr.spec = builtin_reaction(reaction, params, ReactionContext{phi.domain, phi.box_volume()});
  pr.field = std::move(v);
  pr.nu = quantize(phi, phi.domain.dim == 1 ? 32 : 8);
  pr.density = std::move(phi);
  pr.horizon = horizon;
  return pr;
}

const DiscreteSignedMeasure kThree = atoms1d({{-0.5, 1.0}, {0.2, 0.5}, {0.9, 1.5}});

}  // namespace

TEST_CASE("report pass rule") {
  CheckReport r;
  r.observed = {1.0, 2.0};
  r.bound = {1.0, 1.5};
  r.tolerance = 0.5;
  CHECK(within_bounds(r));
  r.tolerance = 0.4;
  CHECK_FALSE(within_bounds(r));
  r.multiplicative = true;
  r.tolerance = 1.4;
  CHECK(within_bounds(r));
  CHECK(format_report(r).rfind("check=", 0) == 0);
}

TEST_CASE("check_positivity examples") {
  const auto line = testing::line();
  const auto death = check_positivity(problem("death_rate", {1.0}, make_field("linear", {-0.2}, line), kThree, 2.0), {});
  CHECK(death.passed);
  CHECK(death.observed[0] <= 1e-8);

  const auto zero = check_positivity(problem("zero", {}, make_field("constant", {0.5}, line), kThree, 1.0), {});
  CHECK(zero.passed);
  CHECK(zero.observed[0] == 0.0);

  // mass 3 > K = 2: decaying branch
  const auto logi = check_positivity(problem("logistic", {1.0, 2.0}, zero_field(line), kThree, 2.0), {});
  CHECK(logi.passed);

  // strong death rate: the undilated control leaves the positive cone
  const auto strong = check_positivity(problem("death_rate", {4.0}, zero_field(line), kThree, 1.0), {});
  CHECK(strong.passed);
  CHECK(strong.series.at("control_neg_part")[0] > 0.0);

  CHECK_THROWS_AS(check_positivity(problem("zero", {}, zero_field(line), atoms1d({{0.0, -1.0}}), 1.0), {}),
                  ContractViolation);
}

TEST_CASE("check_lp_invariance examples") {
  SolverConfig cfg;
  cfg.quad_nodes = 9;
  {
    const auto plane = testing::plane();
    auto phi = grid_from_function(plane, 48, pt(-2, -2), pt(2, 2), 2.0,
                                  [](const Point& x) { return std::exp(-(x[0] * x[0] + x[1] * x[1]) / 0.18); });
    const double n0 = phi.lp_norm();
    const auto r = check_lp_invariance(density_problem("zero", {}, make_field("rotation2d", {1.0}, plane), phi, 1.0), 2.0, cfg);
    CHECK(r.passed);
    for (double n : r.series.at("lp_norm")) CHECK(std::abs(n - n0) <= lp_grid_tolerance(phi));
  }
  {
    const auto line = testing::line();
    const double a = 0.5;
    auto phi = grid_from_function(line, 256, pt(-3), pt(3), 2.0, [](const Point& x) { return std::exp(-x[0] * x[0]); });
    const double n0 = phi.lp_norm();
    const auto r = check_lp_invariance(density_problem("zero", {}, make_field("linear", {-a}, line), phi, 1.0), 2.0, cfg);
    CHECK(r.passed);
    const auto& ts = r.series.at("t");
    const auto& ns = r.series.at("lp_norm");
    for (std::size_t k = 0; k < ts.size(); ++k)
      CHECK(std::abs(ns[k] - n0 * std::exp(a * ts[k] / 2)) <= 1e-3 * n0);
  }
  {
    const auto line = testing::line();
    const double c = 0.6;
    auto phi = grid_from_function(line, 64, pt(-3), pt(3), 3.0, [](const Point& x) { return std::exp(-x[0] * x[0]); });
    const double n0 = phi.lp_norm();
    cfg.quad_nodes = 33;
    const auto r = check_lp_invariance(density_problem("linear_rate", {c}, zero_field(line), phi, 1.5), 3.0, cfg);
    CHECK(r.passed);
    const auto& ts = r.series.at("t");
    const auto& ns = r.series.at("lp_norm");
    for (std::size_t k = 0; k < ts.size(); ++k)
      CHECK(std::abs(ns[k] - n0 * std::exp(c * ts[k])) <= 1e-4 * n0);
  }
}

TEST_CASE("weak_limit_experiment") {
  const auto same = weak_limit_experiment(2.0, std::vector<double>(6, 0.5), 0.5);
  CHECK(same.passed);
  CHECK(same.observed[0] == same.bound[0]);

  std::vector<double> seq;
  for (int n = 1; n <= 500; ++n) seq.push_back(0.5 * (1.0 + 1.0 / n));
  const auto lsc = weak_limit_experiment(2.0, seq, 0.5);
  CHECK(lsc.passed);
  CHECK(lsc.observed[0] == doctest::Approx(std::pow(4.0 * std::numbers::pi * 0.25, -0.25)).epsilon(2e-5));

  std::vector<double> shrink;
  for (int n = 1; n <= 100; ++n) shrink.push_back(1.0 / n);
  const auto ce = weak_limit_experiment(1.0, shrink, 0.0);
  CHECK(ce.passed);
  CHECK(ce.bound[1] == doctest::Approx(1.0 / (0.01 * std::sqrt(2 * std::numbers::pi))).epsilon(1e-3));
  const auto& fm = ce.series.at("fm_to_limit");
  for (std::size_t k = 1; k < fm.size(); ++k) CHECK(fm[k] <= fm[k - 1] + 1e-12);
}

TEST_CASE("check_continuous_dependence examples") {
  const auto line = testing::line();
  SolverConfig cfg;
  const auto same = check_continuous_dependence(problem("logistic", {1.0, 2.0}, zero_field(line), kThree, 1.0),
                                                kThree, kThree, cfg);
  CHECK(same.passed);
  for (double x : same.observed) CHECK(x == 0.0);

  const auto other = atoms1d({{-0.4, 1.0}, {0.2, 0.6}});
  const auto iso = check_continuous_dependence(problem("zero", {}, zero_field(line), kThree, 1.0), kThree, other, cfg);
  for (double x : iso.observed) CHECK(x == doctest::Approx(1.0).epsilon(1e-12));

  const double c = 0.5;
  cfg.quad_nodes = 65;
  const auto lin = check_continuous_dependence(problem("linear_rate", {c}, zero_field(line), kThree, 2.0), kThree,
                                               scale(1.1, kThree), cfg);
  CHECK(lin.passed);
  const auto& ts = lin.series.at("t");
  for (std::size_t k = 0; k < ts.size(); ++k) {
    CHECK(std::abs(lin.observed[k] / std::exp(c * ts[k]) - 1.0) <= 1e-3);
    CHECK(lin.bound[k] == doctest::Approx(std::exp(c * ts[k])).epsilon(1e-12));
  }

  const auto shear = check_continuous_dependence(
      problem("logistic", {1.0, 2.0}, make_field("linear", {0.3}, line), kThree, 1.5), kThree, other, cfg);
  CHECK(shear.passed);
}
