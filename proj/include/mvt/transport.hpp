#pragma once

#include "mvt/flow.hpp"
#include "mvt/grid_density.hpp"
#include "mvt/measure.hpp"
#include "mvt/parallel.hpp"

namespace mvt {

/// (Phi_{s,t})_# mu: atoms advected, weights unchanged.
DiscreteSignedMeasure pushforward_measure(const VelocityField& v, double s, double t,
                                          const DiscreteSignedMeasure& mu, double step_h,
                                          Exec exec = Exec::parallel);
DiscreteSignedMeasure pushforward_measure(const VelocityField& v, double s, double t,
                                          const DiscreteSignedMeasure& mu);

/// Semi-Lagrangian transport of a density:
///   u_t(x) = u_s(y) / det DPhi_{s,t}(y),  y = Phi_{t,s}(x),
/// with y found by integrating backward from each cell center.
GridDensity pushforward_density(const VelocityField& v, double s, double t, const GridDensity& u,
                                double step_h, Exec exec = Exec::parallel);

/// u0_norm * exp((1/q) int_s^t ||(div v_r)^-||_inf dr), 1/p + 1/q = 1.
double lp_transport_bound(const VelocityField& v, double s, double t, double p, double u0_norm);

/// True if every cell with |u| > 1e-9 max|u| stays at least C_{s,t-s}(t-s) away
/// from the box boundary, so backward feet never leave the box.
/// Always true on the torus.
bool box_contains_transport(const VelocityField& v, double s, double t, const GridDensity& u);

}  // namespace mvt
