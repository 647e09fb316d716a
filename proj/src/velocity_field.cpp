#include "mvt/velocity_field.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "mvt/errors.hpp"

namespace mvt {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

void expect_arity(const std::string& name, const std::vector<double>& params, std::size_t lo,
                  std::size_t hi) {
  if (params.size() < lo || params.size() > hi) {
    throw ConfigError(fmt::format("field '{}': expected {} parameter(s), got {}", name,
                                  lo == hi ? fmt::format("{}", lo) : fmt::format("{}..{}", lo, hi),
                                  params.size()));
  }
}

std::function<double(double)> constant_fn(double c) {
  return [c](double) { return c; };
}

}  // namespace

double VelocityField::divergence_neg_bound(double t) const {
  return div_neg ? div_neg(t) : domain.dim * lip_bound(t);
}

double VelocityField::divergence_pos_bound(double t) const {
  return div_pos ? div_pos(t) : domain.dim * lip_bound(t);
}

VelocityField zero_field(const Domain& domain) {
  VelocityField v;
  v.domain = domain;
  v.eval = [](double, const Point&) { return Point{}; };
  v.sup_bound = constant_fn(0.0);
  v.lip_bound = constant_fn(0.0);
  v.divergence = [](double, const Point&) { return 0.0; };
  v.div_neg = constant_fn(0.0);
  v.div_pos = constant_fn(0.0);
  return v;
}

VelocityField make_field(const std::string& name, const std::vector<double>& params,
                         const Domain& domain) {
  const int d = domain.dim;
  VelocityField v;
  v.domain = domain;

  if (name == "zero") {
    expect_arity(name, params, 0, 0);
    return zero_field(domain);
  }

  if (name == "constant") {
    expect_arity(name, params, static_cast<std::size_t>(d), static_cast<std::size_t>(d));
    Point c;
    double norm2 = 0.0;
    for (int i = 0; i < d; ++i) {
      c[i] = params[static_cast<std::size_t>(i)];
      norm2 += c[i] * c[i];
    }
    v.eval = [c](double, const Point&) { return c; };
    v.sup_bound = constant_fn(std::sqrt(norm2));
    v.lip_bound = constant_fn(0.0);
    v.divergence = [](double, const Point&) { return 0.0; };
    v.div_neg = constant_fn(0.0);
    v.div_pos = constant_fn(0.0);
    return v;
  }

  if (name == "linear") {
    expect_arity(name, params, 1, 1);
    if (domain.kind == DomainKind::torus)
      throw ConfigError("field 'linear' is not periodic and cannot be used on the torus");
    const double a = params[0];
    v.eval = [a, d](double, const Point& x) {
      Point out;
      for (int i = 0; i < d; ++i) out[i] = a * x[i];
      return out;
    };
    v.sup_bound = constant_fn(a == 0.0 ? 0.0 : kInf);
    v.lip_bound = constant_fn(std::abs(a));
    v.divergence = [a, d](double, const Point&) { return a * d; };
    v.div_neg = constant_fn(std::max(-a * d, 0.0));
    v.div_pos = constant_fn(std::max(a * d, 0.0));
    return v;
  }

  if (name == "rotation2d") {
    expect_arity(name, params, 1, 3);
    if (params.size() == 2) throw ConfigError("field 'rotation2d': center needs both cx and cy");
    if (d != 2 || domain.kind != DomainKind::euclidean)
      throw ConfigError("field 'rotation2d' requires the Euclidean plane");
    const double w = params[0];
    const double cx = params.size() == 3 ? params[1] : 0.0;
    const double cy = params.size() == 3 ? params[2] : 0.0;
    v.eval = [w, cx, cy](double, const Point& x) {
      Point out;
      out[0] = -w * (x[1] - cy);
      out[1] = w * (x[0] - cx);
      return out;
    };
    v.sup_bound = constant_fn(w == 0.0 ? 0.0 : kInf);
    v.lip_bound = constant_fn(std::abs(w));
    v.divergence = [](double, const Point&) { return 0.0; };
    v.div_neg = constant_fn(0.0);
    v.div_pos = constant_fn(0.0);
    return v;
  }

  if (name == "shear") {
    expect_arity(name, params, 1, 1);
    if (d < 2) throw ConfigError("field 'shear' needs dimension >= 2");
    const double a = params[0];
    v.eval = [a](double, const Point& x) {
      Point out;
      out[0] = a * std::sin(kTwoPi * x[1]);
      return out;
    };
    v.sup_bound = constant_fn(std::abs(a));
    v.lip_bound = constant_fn(kTwoPi * std::abs(a));
    v.divergence = [](double, const Point&) { return 0.0; };
    v.div_neg = constant_fn(0.0);
    v.div_pos = constant_fn(0.0);
    return v;
  }

  if (name == "time_oscillating") {
    expect_arity(name, params, 2, 2);
    const double a = params[0];
    const double w = params[1];
    v.eval = [a, w](double t, const Point& x) {
      Point out;
      out[0] = a * std::cos(w * t) * std::sin(kTwoPi * x[0]);
      return out;
    };
    v.sup_bound = [a, w](double t) { return std::abs(a * std::cos(w * t)); };
    v.lip_bound = [a, w](double t) { return kTwoPi * std::abs(a * std::cos(w * t)); };
    v.divergence = [a, w](double t, const Point& x) {
      return kTwoPi * a * std::cos(w * t) * std::cos(kTwoPi * x[0]);
    };
    v.div_neg = v.lip_bound;
    v.div_pos = v.lip_bound;
    return v;
  }

  throw ConfigError(fmt::format("unknown velocity field '{}'", name));
}

}  // namespace mvt
