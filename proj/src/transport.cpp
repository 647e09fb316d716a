#include "mvt/transport.hpp"

#include <cmath>
#include <vector>

#include "mvt/kernels.hpp"

namespace mvt {

DiscreteSignedMeasure pushforward_measure(const VelocityField& v, double s, double t,
                                          const DiscreteSignedMeasure& mu, double step_h,
                                          Exec exec) {
  const auto atoms = mu.atoms();
  std::vector<Point> in(atoms.size());
  std::vector<Point> out(atoms.size());
  for (std::size_t i = 0; i < atoms.size(); ++i) in[i] = atoms[i].point;
  kernels::advect_points(v, s, t, step_h, in, out, exec);
  std::vector<Atom> moved(atoms.size());
  for (std::size_t i = 0; i < atoms.size(); ++i) moved[i] = {out[i], atoms[i].weight};
  return DiscreteSignedMeasure(mu.domain(), std::move(moved));
}

DiscreteSignedMeasure pushforward_measure(const VelocityField& v, double s, double t,
                                          const DiscreteSignedMeasure& mu) {
  return pushforward_measure(v, s, t, mu, default_step(s, t));
}

GridDensity pushforward_density(const VelocityField& v, double s, double t, const GridDensity& u,
                                double step_h, Exec exec) {
  if (s == t) return u;
  std::vector<FlowSample> feet(u.cell_count());
  kernels::trace_feet(v, t, s, step_h, u, feet, exec);
  std::vector<double> values(u.cell_count());
  kernels::pull_back(u, feet, values, exec);
  return with_values(u, std::move(values));
}

double lp_transport_bound(const VelocityField& v, double s, double t, double p, double u0_norm) {
  const double inv_q = std::isinf(p) ? 1.0 : 1.0 - 1.0 / p;
  const double neg = simpson([&](double r) { return v.divergence_neg_bound(r); }, s, t);
  return u0_norm * std::exp(inv_q * neg);
}

bool box_contains_transport(const VelocityField& v, double s, double t, const GridDensity& u) {
  if (u.domain.kind == DomainKind::torus) return true;
  const double reach = flow_displacement_bound(v, s, t - s) * std::abs(t - s);
  const double floor = 1e-9 * u.max_abs();
  for (std::size_t k = 0; k < u.values.size(); ++k) {
    if (std::abs(u.values[k]) <= floor) continue;
    const Point c = u.cell_center(k);
    for (int i = 0; i < u.domain.dim; ++i) {
      if (c[i] - reach < u.box_min[i] || c[i] + reach > u.box_max[i]) return false;
    }
  }
  return true;
}

}  // namespace mvt
