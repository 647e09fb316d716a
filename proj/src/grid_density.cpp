#include "mvt/grid_density.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>

#include "mvt/errors.hpp"

namespace mvt {

double GridDensity::cell_width(int axis) const noexcept {
  return (box_max[axis] - box_min[axis]) / cells_per_axis;
}

double GridDensity::cell_volume() const noexcept {
  double v = 1.0;
  for (int i = 0; i < domain.dim; ++i) v *= cell_width(i);
  return v;
}

double GridDensity::box_volume() const noexcept {
  double v = 1.0;
  for (int i = 0; i < domain.dim; ++i) v *= box_max[i] - box_min[i];
  return v;
}

Point GridDensity::cell_center(std::size_t flat) const noexcept {
  Point c;
  const auto n = static_cast<std::size_t>(cells_per_axis);
  for (int axis = domain.dim - 1; axis >= 0; --axis) {
    const std::size_t idx = flat % n;
    flat /= n;
    c[axis] = box_min[axis] + (static_cast<double>(idx) + 0.5) * cell_width(axis);
  }
  return c;
}

double GridDensity::mass() const noexcept {
  double s = 0.0;
  for (double v : values) s += v;
  return s * cell_volume();
}

double GridDensity::max_abs() const noexcept {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

double GridDensity::lp_norm(double q) const noexcept {
  if (std::isinf(q)) return max_abs();
  double s = 0.0;
  for (double v : values) s += std::pow(std::abs(v), q);
  return std::pow(s * cell_volume(), 1.0 / q);
}

double GridDensity::sample(const Point& x) const noexcept {
  const int d = domain.dim;
  const int n = cells_per_axis;
  const bool torus = domain.kind == DomainKind::torus;
  std::array<int, 3> lo{};
  std::array<int, 3> hi{};
  std::array<double, 3> frac{};
  for (int i = 0; i < d; ++i) {
    double xi = x[i];
    if (!torus && (xi < box_min[i] || xi > box_max[i])) return 0.0;
    const double s = (xi - box_min[i]) / cell_width(i) - 0.5;
    const double fl = std::floor(s);
    auto k = static_cast<long>(fl);
    double f = s - fl;
    if (torus) {
      long a = k % n;
      if (a < 0) a += n;
      lo[static_cast<std::size_t>(i)] = static_cast<int>(a);
      hi[static_cast<std::size_t>(i)] = static_cast<int>((a + 1) % n);
    } else if (k < 0) {
      lo[static_cast<std::size_t>(i)] = hi[static_cast<std::size_t>(i)] = 0;
      f = 0.0;
    } else if (k >= n - 1) {
      lo[static_cast<std::size_t>(i)] = hi[static_cast<std::size_t>(i)] = n - 1;
      f = 0.0;
    } else {
      lo[static_cast<std::size_t>(i)] = static_cast<int>(k);
      hi[static_cast<std::size_t>(i)] = static_cast<int>(k + 1);
    }
    frac[static_cast<std::size_t>(i)] = f;
  }
  double acc = 0.0;
  for (int corner = 0; corner < (1 << d); ++corner) {
    double w = 1.0;
    std::size_t flat = 0;
    for (int i = 0; i < d; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      const bool up = (corner >> i) & 1;
      w *= up ? frac[ui] : 1.0 - frac[ui];
      flat = flat * static_cast<std::size_t>(n) + static_cast<std::size_t>(up ? hi[ui] : lo[ui]);
    }
    if (w != 0.0) acc += w * values[flat];
  }
  return acc;
}

GridDensity make_grid(const Domain& domain, int cells_per_axis, const Point& box_min,
                      const Point& box_max, double p) {
  if (cells_per_axis < 2) throw ConfigError("grid needs at least 2 cells per axis");
  if (!(p > 1.0)) throw ConfigError("grid exponent p must be > 1");
  GridDensity u;
  u.domain = domain;
  u.cells_per_axis = cells_per_axis;
  u.p = p;
  for (int i = 0; i < domain.dim; ++i) {
    u.box_min[i] = domain.kind == DomainKind::torus ? 0.0 : box_min[i];
    u.box_max[i] = domain.kind == DomainKind::torus ? 1.0 : box_max[i];
    if (!(u.box_max[i] > u.box_min[i])) throw ConfigError("grid box is empty");
  }
  std::size_t count = 1;
  for (int i = 0; i < domain.dim; ++i) count *= static_cast<std::size_t>(cells_per_axis);
  u.values.assign(count, 0.0);
  return u;
}

GridDensity grid_from_function(const Domain& domain, int cells_per_axis, const Point& box_min,
                               const Point& box_max, double p,
                               const std::function<double(const Point&)>& g) {
  GridDensity u = make_grid(domain, cells_per_axis, box_min, box_max, p);
  for (std::size_t k = 0; k < u.values.size(); ++k) u.values[k] = g(u.cell_center(k));
  return u;
}

GridDensity with_values(const GridDensity& like, std::vector<double> values) {
  if (values.size() != like.values.size()) throw ContractViolation("grid size mismatch");
  GridDensity u = like;
  u.values = std::move(values);
  return u;
}

namespace {
void require_same_grid(const GridDensity& u, const GridDensity& w) {
  if (u.domain != w.domain || u.cells_per_axis != w.cells_per_axis || u.box_min != w.box_min ||
      u.box_max != w.box_max)
    throw ContractViolation("densities live on different grids");
}
}  // namespace

GridDensity combine(double a, const GridDensity& u, double b, const GridDensity& w) {
  require_same_grid(u, w);
  GridDensity out = u;
  for (std::size_t k = 0; k < out.values.size(); ++k)
    out.values[k] = a * u.values[k] + b * w.values[k];
  return out;
}

double l1_distance(const GridDensity& u, const GridDensity& w) {
  require_same_grid(u, w);
  double s = 0.0;
  for (std::size_t k = 0; k < u.values.size(); ++k) s += std::abs(u.values[k] - w.values[k]);
  return s * u.cell_volume();
}

DiscreteSignedMeasure quantize(const GridDensity& u) {
  std::vector<Atom> atoms;
  atoms.reserve(u.values.size());
  const double vol = u.cell_volume();
  for (std::size_t k = 0; k < u.values.size(); ++k) {
    if (u.values[k] != 0.0) atoms.push_back({u.cell_center(k), u.values[k] * vol});
  }
  return DiscreteSignedMeasure(u.domain, std::move(atoms));
}

DiscreteSignedMeasure quantize(const GridDensity& u, int cells_per_axis) {
  if (cells_per_axis < 1) throw ConfigError("quantize: cells_per_axis must be >= 1");
  if (cells_per_axis >= u.cells_per_axis) return quantize(u);
  const int d = u.domain.dim;
  std::size_t total = 1;
  for (int i = 0; i < d; ++i) total *= static_cast<std::size_t>(cells_per_axis);
  std::vector<double> mass(total, 0.0);
  const double vol = u.cell_volume();
  for (std::size_t k = 0; k < u.values.size(); ++k) {
    const Point c = u.cell_center(k);
    std::size_t idx = 0;
    for (int i = 0; i < d; ++i) {
      const double rel = (c[i] - u.box_min[i]) / (u.box_max[i] - u.box_min[i]);
      const int j = std::clamp(static_cast<int>(rel * cells_per_axis), 0, cells_per_axis - 1);
      idx = idx * static_cast<std::size_t>(cells_per_axis) + static_cast<std::size_t>(j);
    }
    mass[idx] += u.values[k] * vol;
  }
  std::vector<Atom> atoms;
  for (std::size_t idx = 0; idx < total; ++idx) {
    if (mass[idx] == 0.0) continue;
    Point c;
    std::size_t rest = idx;
    for (int i = d - 1; i >= 0; --i) {
      const auto j = static_cast<double>(rest % static_cast<std::size_t>(cells_per_axis));
      rest /= static_cast<std::size_t>(cells_per_axis);
      c[i] = u.box_min[i] + (j + 0.5) * (u.box_max[i] - u.box_min[i]) / cells_per_axis;
    }
    atoms.push_back({c, mass[idx]});
  }
  return DiscreteSignedMeasure(u.domain, std::move(atoms));
}

void write_grid_csv(std::ostream& out, const GridDensity& u) {
  const int d = u.domain.dim;
  out << "cells_per_axis";
  for (int i = 0; i < d; ++i) out << ",box_min" << (i + 1);
  for (int i = 0; i < d; ++i) out << ",box_max" << (i + 1);
  out << ",p\n" << u.cells_per_axis;
  for (int i = 0; i < d; ++i) out << fmt::format(",{:.17g}", u.box_min[i]);
  for (int i = 0; i < d; ++i) out << fmt::format(",{:.17g}", u.box_max[i]);
  out << fmt::format(",{:.17g}\n", u.p);
  for (double v : u.values) out << fmt::format("{:.17g}\n", v);
}

void write_grid_csv(const std::filesystem::path& path, const GridDensity& u) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open for writing: " + path.string());
  write_grid_csv(out, u);
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out(1);
  for (char c : line) {
    if (c == ',')
      out.emplace_back();
    else if (c != ' ' && c != '\r' && c != '\t')
      out.back().push_back(c);
  }
  return out;
}

double to_double(const std::string& s, std::size_t line_no) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ConfigError(fmt::format("line {}: cannot parse number '{}'", line_no, s));
  return v;
}

}  // namespace

GridDensity read_grid_csv(std::istream& in, DomainKind kind) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("line 1: empty grid file");
  const auto header = split_fields(line);
  if (header.size() < 4 || (header.size() - 2) % 2 != 0 || header.front() != "cells_per_axis" ||
      header.back() != "p")
    throw ConfigError("line 1: expected header cells_per_axis,box_min...,box_max...,p");
  const int d = static_cast<int>(header.size() - 2) / 2;
  const Domain domain = make_domain(kind, d);
  if (!std::getline(in, line)) throw ConfigError("line 2: missing grid parameters");
  const auto params = split_fields(line);
  if (params.size() != header.size())
    throw ConfigError(fmt::format("line 2: expected {} fields, got {}", header.size(), params.size()));
  const double cells = to_double(params[0], 2);
  if (cells != std::floor(cells) || cells < 2 || cells > 1e6)
    throw ConfigError("line 2: cells_per_axis must be an integer >= 2");
  Point lo;
  Point hi;
  for (int i = 0; i < d; ++i) {
    lo[i] = to_double(params[static_cast<std::size_t>(1 + i)], 2);
    hi[i] = to_double(params[static_cast<std::size_t>(1 + d + i)], 2);
  }
  GridDensity u = make_grid(domain, static_cast<int>(cells), lo, hi, to_double(params.back(), 2));
  std::size_t k = 0;
  std::size_t line_no = 2;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    if (k == u.values.size()) throw ConfigError(fmt::format("line {}: too many values", line_no));
    const auto f = split_fields(line);
    if (f.size() != 1) throw ConfigError(fmt::format("line {}: expected one value", line_no));
    u.values[k++] = to_double(f[0], line_no);
  }
  if (k != u.values.size())
    throw ConfigError(fmt::format("grid file has {} values, expected {}", k, u.values.size()));
  return u;
}

GridDensity read_grid_csv(const std::filesystem::path& path, DomainKind kind) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open grid file: " + path.string());
  return read_grid_csv(in, kind);
}

}  // namespace mvt
