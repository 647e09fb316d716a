#include "mvt/flow.hpp"

#include <algorithm>
#include <cmath>

#include "mvt/errors.hpp"

namespace mvt {

namespace {

void check_finite(const Point& p, int dim) {
  for (int i = 0; i < dim; ++i)
    if (!std::isfinite(p[i])) throw NumericalFailure("non-finite velocity evaluation");
}

// State is (x, ell) with ell' = div v when `with_div` is set.
template <bool with_div>
FlowSample integrate(const VelocityField& v, double s, double t, const Point& x0, double h) {
  if (!(h > 0.0)) throw ContractViolation("RK4 step must be positive");
  const Domain& dom = v.domain;
  const int d = dom.dim;
  FlowSample cur{canonicalize(dom, x0), 0.0};
  if (t == s) return cur;

  const double span = std::abs(t - s);
  const double dir = t > s ? 1.0 : -1.0;
  auto full = static_cast<long>(std::floor(span / h));
  double rest = span - static_cast<double>(full) * h;
  if (rest <= 1e-12 * h) {
    rest = 0.0;
  }
  const long steps = full + (rest > 0.0 ? 1 : 0);

  auto axpy = [d](const Point& x, double a, const Point& k) {
    Point y = x;
    for (int i = 0; i < d; ++i) y[i] += a * k[i];
    return y;
  };
  auto vel = [&](double time, const Point& x) {
    Point k = v.eval(time, x);
    check_finite(k, d);
    return k;
  };
  auto div = [&](double time, const Point& x) {
    const double q = divergence_at(v, time, x);
    if (!std::isfinite(q)) throw NumericalFailure("non-finite divergence");
    return q;
  };

  for (long k = 0; k < steps; ++k) {
    const double tk = s + dir * static_cast<double>(k) * h;
    const double hk = dir * (k == full ? rest : h);
    const Point& x = cur.point;
    const Point k1 = vel(tk, x);
    const Point x2 = axpy(x, 0.5 * hk, k1);
    const Point k2 = vel(tk + 0.5 * hk, x2);
    const Point x3 = axpy(x, 0.5 * hk, k2);
    const Point k3 = vel(tk + 0.5 * hk, x3);
    const Point x4 = axpy(x, hk, k3);
    const Point k4 = vel(tk + hk, x4);
    if constexpr (with_div) {
      const double l1 = div(tk, x);
      const double l2 = div(tk + 0.5 * hk, x2);
      const double l3 = div(tk + 0.5 * hk, x3);
      const double l4 = div(tk + hk, x4);
      cur.log_jacobian += hk / 6.0 * (l1 + 2.0 * l2 + 2.0 * l3 + l4);
    }
    Point next = x;
    for (int i = 0; i < d; ++i) next[i] += hk / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    cur.point = canonicalize(dom, next);
  }
  return cur;
}

}  // namespace

double default_step(double s, double t) {
  return s == t ? 1e-2 : std::min(1e-3 * std::abs(t - s), 1e-2);
}

Point advect_point(const VelocityField& v, double s, double t, const Point& x0, double step_h) {
  return integrate<false>(v, s, t, x0, step_h).point;
}

FlowSample advect_with_jacobian(const VelocityField& v, double s, double t, const Point& x0,
                                double step_h) {
  return integrate<true>(v, s, t, x0, step_h);
}

double divergence_at(const VelocityField& v, double t, const Point& x) {
  if (v.divergence) return v.divergence(t, x);
  double sum = 0.0;
  for (int i = 0; i < v.domain.dim; ++i) {
    Point xp = x;
    Point xm = x;
    xp[i] += kDivergenceFdStep;
    xm[i] -= kDivergenceFdStep;
    sum += (v.eval(t, xp)[i] - v.eval(t, xm)[i]) / (2.0 * kDivergenceFdStep);
  }
  return sum;
}

double simpson(const std::function<double(double)>& g, double a, double b, int panels) {
  if (a == b) return 0.0;
  if (panels < 2) panels = 2;
  if (panels % 2 != 0) ++panels;
  const double h = (b - a) / panels;
  double sum = g(a) + g(b);
  for (int i = 1; i < panels; ++i) sum += (i % 2 == 1 ? 4.0 : 2.0) * g(a + i * h);
  return sum * h / 3.0;
}

double lipschitz_bound(const VelocityField& v, double s, double t) {
  return std::exp(simpson(v.lip_bound, std::min(s, t), std::max(s, t)));
}

double jacobian_det(const VelocityField& v, double s, double t, const Point& x0, double step_h) {
  return std::exp(advect_with_jacobian(v, s, t, x0, step_h).log_jacobian);
}

JacobianBand jacobian_band(const VelocityField& v, double s, double t) {
  const double a = std::min(s, t);
  const double b = std::max(s, t);
  const double neg = simpson([&](double r) { return v.divergence_neg_bound(r); }, a, b);
  const double pos = simpson([&](double r) { return v.divergence_pos_bound(r); }, a, b);
  // Running the flow backward swaps the roles of expansion and compression.
  if (t >= s) return {std::exp(-neg), std::exp(pos)};
  return {std::exp(-pos), std::exp(neg)};
}

double flow_displacement_bound(const VelocityField& v, double t0, double tau) {
  constexpr int kSamples = 256;
  double best = v.sup_bound(t0);
  for (int i = 1; i <= kSamples; ++i) best = std::max(best, v.sup_bound(t0 + tau * i / kSamples));
  return best;
}

}  // namespace mvt
