#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mvt/measure.hpp"

namespace mvt {

/// Time-dependent velocity field v_t(x) with analytic bound metadata.
///
/// The bound callbacks are pointwise in time: `sup_bound(t)` bounds
/// ||v_t||_inf, `lip_bound(t)` bounds |v_t|_L, and `div_neg(t)`/`div_pos(t)`
/// bound the negative and positive parts of div v_t. Interval quantities are
/// obtained by integrating or maximizing these over time.
struct VelocityField {
  Domain domain;
  std::function<Point(double, const Point&)> eval;
  std::function<double(double)> sup_bound;
  std::function<double(double)> lip_bound;
  /// Empty means "not known analytically": central differences are used.
  std::function<double(double, const Point&)> divergence;
  /// Empty defaults to dim * lip_bound(t), which is always valid.
  std::function<double(double)> div_neg;
  std::function<double(double)> div_pos;

  Point operator()(double t, const Point& x) const { return eval(t, x); }
  double divergence_neg_bound(double t) const;
  double divergence_pos_bound(double t) const;
};

/// Built-in fields:
///   constant          [c_1..c_d]            v = c
///   linear            [a]                   v = a x            (R^d only)
///   zero              []
///   rotation2d        [omega, (cx, cy)]     v = omega (-(y-cy), x-cx)  (R^2 only)
///   shear             [a]                   v = (a sin(2 pi x_2), 0, ..)  (d >= 2)
///   time_oscillating  [a, omega]            v_1 = a cos(omega t) sin(2 pi x_1)
/// Throws ConfigError on unknown names, bad arity or unsupported domains.
VelocityField make_field(const std::string& name, const std::vector<double>& params,
                         const Domain& domain);

VelocityField zero_field(const Domain& domain);

}  // namespace mvt
