#include "mvt/kernels.hpp"

#include <cmath>

#include "mvt/errors.hpp"

namespace mvt::kernels {

void advect_points(const VelocityField& v, double s, double t, double step_h,
                   std::span<const Point> in, std::span<Point> out, Exec exec) {
  if (in.size() != out.size()) throw ContractViolation("advect_points: size mismatch");
  parallel_for(in.size(), exec, [&](std::size_t i) { out[i] = advect_point(v, s, t, in[i], step_h); });
}

void trace_feet(const VelocityField& v, double t, double s, double step_h,
                const GridDensity& grid, std::span<FlowSample> feet, Exec exec) {
  if (feet.size() != grid.cell_count()) throw ContractViolation("trace_feet: size mismatch");
  parallel_for(feet.size(), exec, [&](std::size_t k) {
    feet[k] = advect_with_jacobian(v, t, s, grid.cell_center(k), step_h);
  });
}

void pull_back(const GridDensity& u, std::span<const FlowSample> feet, std::span<double> out,
               Exec exec) {
  if (feet.size() != out.size()) throw ContractViolation("pull_back: size mismatch");
  parallel_for(out.size(), exec, [&](std::size_t k) {
    const double val = u.sample(feet[k].point);
    out[k] = val == 0.0 ? 0.0 : val * std::exp(feet[k].log_jacobian);
  });
}

}  // namespace mvt::kernels
