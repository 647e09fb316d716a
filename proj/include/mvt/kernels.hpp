#pragma once

#include <span>

#include "mvt/flow.hpp"
#include "mvt/grid_density.hpp"
#include "mvt/parallel.hpp"

namespace mvt::kernels {

/// out[i] = Phi_{s,t}(in[i]).
void advect_points(const VelocityField& v, double s, double t, double step_h,
                   std::span<const Point> in, std::span<Point> out, Exec exec);

/// Backward characteristics from every cell center of `grid`, traced from
/// time t back to time s, with the log-Jacobian accumulated along the way.
void trace_feet(const VelocityField& v, double t, double s, double step_h,
                const GridDensity& grid, std::span<FlowSample> feet, Exec exec);

/// out[k] = u(feet[k].point) * exp(feet[k].log_jacobian).
void pull_back(const GridDensity& u, std::span<const FlowSample> feet, std::span<double> out,
               Exec exec);

}  // namespace mvt::kernels
