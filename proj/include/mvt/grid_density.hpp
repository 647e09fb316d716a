#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <vector>

#include "mvt/measure.hpp"

namespace mvt {

/// Cell-averaged density on a uniform grid over an axis-aligned box
/// (the unit cube for the torus). Values are stored row-major, first axis
/// slowest. `p` is the Lebesgue exponent the density is tracked in
/// (p > 1, +inf allowed).
struct GridDensity {
  Domain domain;
  int cells_per_axis = 2;
  Point box_min;
  Point box_max;
  double p = 2.0;
  std::vector<double> values;

  std::size_t cell_count() const noexcept { return values.size(); }
  double cell_width(int axis) const noexcept;
  double cell_volume() const noexcept;
  double box_volume() const noexcept;
  Point cell_center(std::size_t flat) const noexcept;

  double mass() const noexcept;
  double lp_norm() const noexcept { return lp_norm(p); }
  double lp_norm(double q) const noexcept;
  double max_abs() const noexcept;

  /// Multilinear interpolation between cell centers; periodic on the torus.
  /// On R^d, points between the outermost centers and the box edge use the
  /// nearest center value and points outside the box give 0.
  double sample(const Point& x) const noexcept;
};

/// Zero density. Throws ConfigError if cells_per_axis < 2, p <= 1 or the box
/// is empty. For the torus the box is forced to [0,1)^d.
GridDensity make_grid(const Domain& domain, int cells_per_axis, const Point& box_min,
                      const Point& box_max, double p);

/// Density with values g(cell center).
GridDensity grid_from_function(const Domain& domain, int cells_per_axis, const Point& box_min,
                               const Point& box_max, double p,
                               const std::function<double(const Point&)>& g);

/// Same grid and exponent, values replaced.
GridDensity with_values(const GridDensity& like, std::vector<double> values);

/// a*u + b*w on identical grids (ContractViolation otherwise).
GridDensity combine(double a, const GridDensity& u, double b, const GridDensity& w);

double l1_distance(const GridDensity& u, const GridDensity& w);

/// One atom per cell center with weight value * cell_volume.
DiscreteSignedMeasure quantize(const GridDensity& u);

/// Coarse quantization: cell masses summed into a cells_per_axis^d block
/// grid over the same box, one atom per block center.
DiscreteSignedMeasure quantize(const GridDensity& u, int cells_per_axis);

/// CSV: header `cells_per_axis,box_min...,box_max...,p`, one line with
/// those numbers, then one value per line in row-major order.
void write_grid_csv(std::ostream& out, const GridDensity& u);
void write_grid_csv(const std::filesystem::path& path, const GridDensity& u);
GridDensity read_grid_csv(std::istream& in, DomainKind kind);
GridDensity read_grid_csv(const std::filesystem::path& path, DomainKind kind);

}  // namespace mvt
