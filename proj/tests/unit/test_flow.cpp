#include <doctest.h>

#include <cmath>
#include <limits>

#include "generators.hpp"
#include "mvt/errors.hpp"
#include "mvt/flow.hpp"

using namespace mvt;
using mvt::testing::Gen;

namespace {

Point pt(double x, double y = 0.0) {
  Point p;
  p[0] = x;
  p[1] = y;
  return p;
}

double gap(const Domain& dom, const Point& a, const Point& b) { return distance(dom, a, b); }

}  // namespace

TEST_CASE("advect_point: constant field and identity") {
  const auto v = make_field("constant", {0.3, -1.25}, testing::plane());
  const Point x = advect_point(v, 0.5, 2.0, pt(1.0, 2.0), 0.1);
  CHECK(x[0] == doctest::Approx(1.0 + 0.3 * 1.5).epsilon(1e-14));
  CHECK(x[1] == doctest::Approx(2.0 - 1.25 * 1.5).epsilon(1e-14));
  CHECK(advect_point(v, 1.0, 1.0, pt(0.1, 0.2), 0.1) == pt(0.1, 0.2));
}

TEST_CASE("advect_point: linear field converges at fourth order") {
  const auto v = make_field("linear", {0.9}, testing::line());
  const double exact = std::exp(0.9 * 2.0);
  const double e1 = std::abs(advect_point(v, 0.0, 2.0, pt(1.0), 0.1)[0] - exact);
  const double e2 = std::abs(advect_point(v, 0.0, 2.0, pt(1.0), 0.05)[0] - exact);
  CHECK(e1 < 1e-5);
  CHECK(e1 / e2 == doctest::Approx(16.0).epsilon(0.1));
}

TEST_CASE("advect_point: last step is shortened") {
  const auto v = make_field("linear", {1.0}, testing::line());
  const double x = advect_point(v, 0.0, 0.35, pt(1.0), 0.1)[0];
  CHECK(x == doctest::Approx(std::exp(0.35)).epsilon(1e-5));
}

TEST_CASE("advect_point: torus wrapping") {
  const Domain t1 = make_domain(DomainKind::torus, 1);
  const auto v = make_field("constant", {0.7}, t1);
  const Point x = advect_point(v, 0.0, 2.0, pt(0.5), 0.01);
  CHECK(x[0] == doctest::Approx(0.9).epsilon(1e-12));
}

TEST_CASE("advect_point: non-finite velocity is reported") {
  VelocityField v = make_field("constant", {1.0}, testing::line());
  v.eval = [](double, const Point&) { return pt(std::numeric_limits<double>::quiet_NaN()); };
  CHECK_THROWS_AS(advect_point(v, 0.0, 1.0, pt(0.0), 0.1), NumericalFailure);
}

TEST_CASE("lipschitz_bound") {
  const auto zero = zero_field(testing::line());
  CHECK(lipschitz_bound(zero, 0.0, 3.0) == 1.0);
  const auto lin = make_field("linear", {-0.4}, testing::line());
  CHECK(lipschitz_bound(lin, 1.0, 3.5) == doctest::Approx(std::exp(0.4 * 2.5)).epsilon(1e-14));
  VelocityField ramp = zero_field(testing::line());
  ramp.lip_bound = [](double t) { return t; };
  CHECK(std::abs(lipschitz_bound(ramp, 0.0, 1.0) - std::exp(0.5)) <= 1e-10);
}

TEST_CASE("jacobian_det") {
  const auto rot = make_field("rotation2d", {1.3}, testing::plane());
  CHECK(std::abs(jacobian_det(rot, 0.0, 2.0, pt(0.4, -0.3), 1e-2) - 1.0) <= 1e-8);
  const auto lin = make_field("linear", {0.6}, testing::line());
  CHECK(std::abs(jacobian_det(lin, 0.0, 1.5, pt(0.2), 1e-2) - std::exp(0.9)) <= 1e-6);
  CHECK(jacobian_det(lin, 0.7, 0.7, pt(0.2), 1e-2) == 1.0);

  VelocityField fd = make_field("linear", {0.6}, testing::line());
  fd.divergence = nullptr;
  CHECK(std::abs(jacobian_det(fd, 0.0, 1.5, pt(0.2), 1e-2) - std::exp(0.9)) <= 1e-6);
}

TEST_CASE("jacobian_det matches a finite-difference determinant") {
  const Domain t2 = make_domain(DomainKind::torus, 2);
  VelocityField v = make_field("time_oscillating", {0.3, 2.0}, t2);
  Gen g(5);
  for (int i = 0; i < 20; ++i) {
    const Point x = g.point(t2);
    const double s = 0.0;
    const double t = 0.8;
    const double h = 1e-3;
    const double e = 1e-5;
    double m[2][2];
    for (int j = 0; j < 2; ++j) {
      Point xp = x;
      Point xm = x;
      xp[j] += e;
      xm[j] -= e;
      const Point d = displacement(t2, advect_point(v, s, t, xm, h), advect_point(v, s, t, xp, h));
      for (int r = 0; r < 2; ++r) m[r][j] = d[r] / (2 * e);
    }
    const double det_fd = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    const double det = jacobian_det(v, s, t, x, h);
    CHECK(std::abs(det - det_fd) <= 1e-4 * det);
    const auto band = jacobian_band(v, s, t);
    CHECK(det >= band.lower * (1 - 1e-4));
    CHECK(det <= band.upper * (1 + 1e-4));
  }
}

TEST_CASE("flow_displacement_bound") {
  CHECK(flow_displacement_bound(zero_field(testing::line()), 0.0, 1.0) == 0.0);
  VelocityField v = zero_field(testing::line());
  v.sup_bound = [](double) { return 3.0; };
  CHECK(flow_displacement_bound(v, 0.0, 1.0) == 3.0);
  v.sup_bound = [](double t) { return 1.0 + t; };
  CHECK(flow_displacement_bound(v, 0.0, 2.0) == doctest::Approx(3.0).epsilon(1e-15));
}

TEST_CASE("property: semigroup, inverse consistency and Lipschitz quotients") {
  Gen g(21);
  const Domain t2 = make_domain(DomainKind::torus, 2);
  const auto shear = make_field("shear", {0.4}, t2);
  const auto osc = make_field("time_oscillating", {0.25, 3.0}, t2);
  const double h = 1e-3;
  for (int i = 0; i < 200; ++i) {
    const auto& v = i % 2 == 0 ? shear : osc;
    const Point x = g.point(t2);
    const double s = g.uniform(0.0, 0.5);
    const double m = s + g.uniform(0.0, 0.5);
    const double t = m + g.uniform(0.0, 0.5);
    const Point direct = advect_point(v, s, t, x, h);
    const Point composed = advect_point(v, m, t, advect_point(v, s, m, x, h), h);
    CHECK(gap(t2, direct, composed) <= 1e-9);

    const Point back = advect_point(v, t, s, direct, h);
    CHECK(gap(t2, back, x) <= 1e-9);

    const Point y = g.point(t2);
    const double dxy = gap(t2, x, y);
    if (dxy > 1e-9) {
      const double q = gap(t2, direct, advect_point(v, s, t, y, h)) / dxy;
      CHECK(q <= lipschitz_bound(v, s, t) * 1.001);
    }
  }
}

TEST_CASE("make_field validation") {
  CHECK_THROWS_AS(make_field("nope", {}, testing::line()), ConfigError);
  CHECK_THROWS_AS(make_field("constant", {1.0, 2.0}, testing::line()), ConfigError);
  CHECK_THROWS_AS(make_field("linear", {1.0}, make_domain(DomainKind::torus, 1)), ConfigError);
  CHECK_THROWS_AS(make_field("rotation2d", {1.0}, testing::line()), ConfigError);
  CHECK_THROWS_AS(make_field("shear", {1.0}, testing::line()), ConfigError);
}
