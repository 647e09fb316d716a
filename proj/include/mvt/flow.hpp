#pragma once

#include <functional>

#include "mvt/measure.hpp"
#include "mvt/velocity_field.hpp"

namespace mvt {

inline constexpr double kDivergenceFdStep = 1e-5;

/// Default RK4 step for integrating over [s, t]: 1e-3 |t - s|, capped at 1e-2.
double default_step(double s, double t);

/// Classical RK4 for x' = v_t(x) from s to t with fixed step `step_h`
/// (last step shortened). t < s integrates backward. Torus coordinates are
/// wrapped after each step. Throws NumericalFailure on non-finite velocity.
Point advect_point(const VelocityField& v, double s, double t, const Point& x0, double step_h);

struct FlowSample {
  Point point;
  double log_jacobian = 0.0;  // integral of div v along the characteristic
};

/// advect_point together with log det DPhi_{s,t}(x0) via the Liouville identity.
FlowSample advect_with_jacobian(const VelocityField& v, double s, double t, const Point& x0,
                                double step_h);

/// Analytic divergence when available, otherwise central differences.
double divergence_at(const VelocityField& v, double t, const Point& x);

/// Composite Simpson rule with `panels` (rounded up to even) subintervals.
double simpson(const std::function<double(double)>& g, double a, double b, int panels = 256);

/// L^v_{s,t} = exp(int_s^t |v_r|_L dr).
double lipschitz_bound(const VelocityField& v, double s, double t);

/// det DPhi_{s,t}(x0) = exp(log_jacobian).
double jacobian_det(const VelocityField& v, double s, double t, const Point& x0, double step_h);

/// Band [exp(-int ||(div v)^-||), exp(int ||(div v)^+||)] containing jacobian_det.
struct JacobianBand {
  double lower = 1.0;
  double upper = 1.0;
};
JacobianBand jacobian_band(const VelocityField& v, double s, double t);

/// C_{t0,tau}: sampled supremum of sup_bound over [t0, t0 + tau].
double flow_displacement_bound(const VelocityField& v, double t0, double tau);

/// Phi^v_{s,t} with a fixed step.
class FlowMap {
 public:
  FlowMap(const VelocityField& v, double s, double t, double step_h)
      : v_(&v), s_(s), t_(t), h_(step_h) {}

  double s() const noexcept { return s_; }
  double t() const noexcept { return t_; }
  double step_h() const noexcept { return h_; }

  Point advance(const Point& x) const { return advect_point(*v_, s_, t_, x, h_); }
  double log_jacobian(const Point& x) const {
    return advect_with_jacobian(*v_, s_, t_, x, h_).log_jacobian;
  }

 private:
  const VelocityField* v_;
  double s_;
  double t_;
  double h_;
};

}  // namespace mvt
