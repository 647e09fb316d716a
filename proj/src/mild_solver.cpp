#include "mvt/mild_solver.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <unordered_map>

#include "mvt/errors.hpp"
#include "mvt/flat_metric.hpp"
#include "mvt/flow.hpp"
#include "mvt/kernels.hpp"
#include "mvt/transport.hpp"

namespace mvt {

void SolverConfig::validate() const {
  if (!(delta > 0.0)) throw ConfigError("solver.delta must be > 0");
  if (!(delta_relative >= 0.0)) throw ConfigError("solver.delta_relative must be >= 0");
  if (quad_nodes < 2) throw ConfigError("solver.quad_nodes must be >= 2");
  if (!(picard_tol >= 1e-12)) throw ConfigError("solver.picard_tol must be >= 1e-12");
  if (picard_max_iter < 1) throw ConfigError("solver.picard_max_iter must be >= 1");
  if (!(flow_step_h > 0.0)) throw ConfigError("solver.flow_step_h must be > 0");
  if (!(tv_blowup_threshold >= 0.0)) throw ConfigError("solver.tv_blowup_threshold must be >= 0");
  if (!(lp_blowup_threshold >= 0.0)) throw ConfigError("solver.lp_blowup_threshold must be >= 0");
  if (dilation_mode == DilationMode::fixed && !(dilation_c >= 0.0))
    throw ConfigError("solver.dilation_c must be >= 0");
  if (!(max_step > 0.0)) throw ConfigError("solver.max_step must be > 0");
  if (!(contraction_target > 0.0 && contraction_target < 1.0))
    throw ConfigError("solver.contraction_target must lie in (0, 1)");
}

double effective_delta(const SolverConfig& config, double radius) {
  return std::max(config.delta, config.delta_relative * radius);
}

std::vector<double> uniform_nodes(double t0, double tau, int count) {
  std::vector<double> s(static_cast<std::size_t>(count));
  const int last = count - 1;
  for (int k = 0; k < count; ++k) s[static_cast<std::size_t>(k)] = t0 + tau * k / last;
  s.back() = t0 + tau;
  return s;
}

// ---------------------------------------------------------------------------
// Step and dilation selection.

double choose_step(const ReactionSpec& spec, double radius, double delta, double lv, double cap,
                   double contraction_target) {
  const double cf = spec.c_f(radius + delta);
  const double lf = spec.l_f(radius + delta);
  if (!std::isfinite(cf) || !std::isfinite(lf))
    throw NumericalFailure("choose_step: reaction constants are not finite");
  double tau = cap;
  if (cf > 0.0) tau = std::min(tau, delta / cf);
  if (lf > 0.0) tau = std::min(tau, contraction_target / (lf * lv));
  return tau;
}

double choose_step(const ReactionSpec& spec, const VelocityField& v, double t0, double radius,
                   double delta, double cap, double contraction_target) {
  const double cf = spec.c_f(radius + delta);
  const double lf = spec.l_f(radius + delta);
  if (!std::isfinite(cf) || !std::isfinite(lf))
    throw NumericalFailure("choose_step: reaction constants are not finite");
  double tau = cap;
  if (cf > 0.0) tau = std::min(tau, delta / cf);
  if (lf > 0.0) {
    // L^v shrinks with the step, so one correction from the ball-invariance
    // step already satisfies the contraction requirement.
    const double lv = std::isfinite(tau) ? lipschitz_bound(v, t0, t0 + tau) : 1.0;
    tau = std::min(tau, contraction_target / (lf * lv));
  }
  return tau;
}

namespace {
double dilation_factor(double l, double c, double tau, double lv) {
  if (c == 0.0) return l * lv * tau;
  return (l + c) * lv * -std::expm1(-c * tau) / c;
}
}  // namespace

int dilation_pieces(double l, double c, double tau, double lv, double target) {
  if (dilation_factor(l, c, tau, lv) < target) return 1;
  double guess;
  if (c == 0.0) {
    guess = l * lv * tau / target;
  } else {
    const double q = target * c / ((l + c) * lv);
    guess = q >= 1.0 ? 1.0 : c * tau / -std::log1p(-q);
  }
  auto n = static_cast<long>(std::max(1.0, std::floor(guess)));
  while (n > 1 && dilation_factor(l, c, tau / static_cast<double>(n - 1), lv) < target) --n;
  while (dilation_factor(l, c, tau / static_cast<double>(n), lv) >= target) ++n;
  if (n > 1000000) throw NumericalFailure("dilation needs more than 1e6 pieces");
  return static_cast<int>(n);
}

Dilation choose_dilation(const ReactionSpec& spec, double radius, double horizon, double tau,
                         double lv, double target) {
  Dilation d;
  d.c = spec.c_pos ? spec.c_pos(2.0 * radius, horizon) : 0.0;
  d.pieces = dilation_pieces(spec.l_f(2.0 * radius), d.c, tau, lv, target);
  return d;
}

// ---------------------------------------------------------------------------
// Node-to-node transport with a characteristic cache.

namespace {

struct PointKey {
  std::uint64_t a;
  std::uint64_t b;
  std::uint64_t c;
  bool operator==(const PointKey&) const = default;
};

struct PointKeyHash {
  std::size_t operator()(const PointKey& k) const noexcept {
    std::uint64_t h = k.a * 0x9E3779B97F4A7C15ULL;
    h ^= k.b + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
    h ^= k.c + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

PointKey key_of(const Point& p) {
  return {std::bit_cast<std::uint64_t>(p[0]), std::bit_cast<std::uint64_t>(p[1]),
          std::bit_cast<std::uint64_t>(p[2])};
}

double neg_part(const DiscreteSignedMeasure& mu) {
  double s = 0.0;
  for (const auto& a : mu.atoms())
    if (a.weight < 0.0) s -= a.weight;
  return s;
}

class NodeTransport {
 public:
  NodeTransport(const VelocityField& v, std::vector<double> nodes, double max_h, Exec exec)
      : v_(v), nodes_(std::move(nodes)), exec_(exec), cache_(nodes_.size()) {
    const double dt = nodes_.size() > 1 ? nodes_[1] - nodes_[0] : 0.0;
    h_ = std::min(max_h, dt > 0.0 ? dt : max_h);
  }

  const std::vector<double>& nodes() const { return nodes_; }
  std::size_t count() const { return nodes_.size(); }
  double step_h() const { return h_; }

  /// Push mu from node k-1 to node k and scale weights by `factor`.
  DiscreteSignedMeasure advance(std::size_t k, const DiscreteSignedMeasure& mu, double factor) {
    auto& cache = cache_[k];
    const auto atoms = mu.atoms();
    std::vector<Point> missing;
    for (const auto& a : atoms)
      if (!cache.contains(key_of(a.point))) missing.push_back(a.point);
    if (!missing.empty()) {
      std::sort(missing.begin(), missing.end(), [](const Point& x, const Point& y) { return x.x < y.x; });
      missing.erase(std::unique(missing.begin(), missing.end()), missing.end());
      std::vector<Point> moved(missing.size());
      kernels::advect_points(v_, nodes_[k - 1], nodes_[k], h_, missing, moved, exec_);
      for (std::size_t i = 0; i < missing.size(); ++i) cache.emplace(key_of(missing[i]), moved[i]);
    }
    std::vector<Atom> out;
    out.reserve(atoms.size());
    for (const auto& a : atoms) out.push_back({cache.at(key_of(a.point)), factor * a.weight});
    return DiscreteSignedMeasure(mu.domain(), std::move(out));
  }

  /// P_{t0, s_k} nu for every node.
  std::vector<DiscreteSignedMeasure> free_transport(const DiscreteSignedMeasure& nu) {
    std::vector<DiscreteSignedMeasure> out;
    out.reserve(nodes_.size());
    out.push_back(nu);
    for (std::size_t k = 1; k < nodes_.size(); ++k) out.push_back(advance(k, out.back(), 1.0));
    return out;
  }

 private:
  const VelocityField& v_;
  std::vector<double> nodes_;
  Exec exec_;
  double h_ = 0.0;
  std::vector<std::unordered_map<PointKey, Point, PointKeyHash>> cache_;
};

// One dilated sweep. `base` holds P_{t0,s_k} nu (undilated).
std::vector<DiscreteSignedMeasure> sweep(const ReactionSpec& spec, NodeTransport& transport,
                                         double c, const std::vector<DiscreteSignedMeasure>& base,
                                         const std::vector<DiscreteSignedMeasure>& curve,
                                         Exec exec) {
  const auto& s = transport.nodes();
  const std::size_t n = s.size();
  if (curve.size() != n || base.size() != n)
    throw ContractViolation("Picard sweep: curve does not match the quadrature nodes");

  std::vector<DiscreteSignedMeasure> g(n);
  parallel_for(n, exec, [&](std::size_t k) {
    const auto fk = eval_reaction(spec, s[k], curve[k]);
    g[k] = c == 0.0 ? fk : linear_combine(1.0, fk, c, curve[k]);
  });

  std::vector<DiscreteSignedMeasure> out(n);
  out[0] = base[0];
  DiscreteSignedMeasure carry = scale(0.5, g[0]);
  for (std::size_t k = 1; k < n; ++k) {
    const double dt = s[k] - s[k - 1];
    const double decay = std::exp(-c * dt);
    const auto a = transport.advance(k, carry, decay);
    const auto head = c == 0.0 ? base[k] : scale(std::exp(-c * (s[k] - s[0])), base[k]);
    out[k] = linear_combine(1.0, head, dt, linear_combine(1.0, a, 0.5, g[k]));
    carry = linear_combine(1.0, a, 1.0, g[k]);
  }
  return out;
}

double sup_distance(const std::vector<DiscreteSignedMeasure>& a,
                    const std::vector<DiscreteSignedMeasure>& b, Exec exec) {
  std::vector<double> d(a.size(), 0.0);
  parallel_for(a.size(), exec, [&](std::size_t k) { d[k] = fm_distance(a[k], b[k]); });
  return *std::max_element(d.begin(), d.end());
}

Segment run_picard_step(const ReactionSpec& spec, const VelocityField& v, double c, double t0,
                        double tau, const Segment& curve, const SolverConfig& config) {
  if (curve.measures.empty() || curve.times.size() != curve.measures.size())
    throw ContractViolation("picard_step: malformed curve");
  const auto nodes = uniform_nodes(t0, tau, static_cast<int>(curve.times.size()));
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    if (std::abs(nodes[k] - curve.times[k]) > 1e-12 * std::max(1.0, std::abs(nodes[k])))
      throw ContractViolation("picard_step: curve is not sampled on uniform nodes of [t0, t0+tau]");
  }
  NodeTransport transport(v, nodes, config.flow_step_h, config.exec);
  const auto base = transport.free_transport(curve.measures.front());
  return {nodes, sweep(spec, transport, c, base, curve.measures, config.exec)};
}

struct PieceResult {
  std::vector<double> times;
  std::vector<DiscreteSignedMeasure> measures;
  int iters = 0;
  double ratio = 0.0;
  double residual = 0.0;
};

PieceResult picard_iterate(const ReactionSpec& spec, const VelocityField& v, double c, double t0,
                           double tau, const DiscreteSignedMeasure& nu, const SolverConfig& config) {
  NodeTransport transport(v, uniform_nodes(t0, tau, config.quad_nodes), config.flow_step_h,
                          config.exec);
  const auto base = transport.free_transport(nu);
  std::vector<DiscreteSignedMeasure> curve = base;
  PieceResult res;
  double prev = -1.0;
  bool converged = false;
  for (int it = 1; it <= config.picard_max_iter; ++it) {
    auto next = sweep(spec, transport, c, base, curve, config.exec);
    const double d = sup_distance(next, curve, config.exec);
    if (prev > 10.0 * config.picard_tol) res.ratio = std::max(res.ratio, d / prev);
    prev = d;
    curve = std::move(next);
    res.iters = it;
    if (d <= config.picard_tol) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw NonContraction(
        fmt::format("Picard iteration on [{}, {}] did not reach tolerance {} in {} iterations "
                    "(measured ratio {:.4g})",
                    t0, t0 + tau, config.picard_tol, config.picard_max_iter, res.ratio),
        res.ratio);
  }
  const auto check = sweep(spec, transport, c, base, curve, config.exec);
  res.residual = sup_distance(check, curve, config.exec);
  res.times = transport.nodes();
  res.measures = std::move(curve);
  return res;
}

}  // namespace

Segment picard_step(const ReactionSpec& spec, const VelocityField& v, double t0, double tau,
                    const Segment& curve, const SolverConfig& config) {
  return run_picard_step(spec, v, 0.0, t0, tau, curve, config);
}

Segment picard_step_dilated(const ReactionSpec& spec, const VelocityField& v, double c, double t0,
                            double tau, const Segment& curve, const SolverConfig& config) {
  if (!(c >= 0.0)) throw ContractViolation("picard_step_dilated: c must be >= 0");
  return run_picard_step(spec, v, c, t0, tau, curve, config);
}

DiscreteSignedMeasure interpolate_segment(const Segment& seg, const VelocityField& v, double t,
                                          double step_h) {
  const auto& s = seg.times;
  if (s.empty() || t < s.front() || t > s.back())
    throw ContractViolation("interpolate_segment: time outside the segment");
  auto it = std::upper_bound(s.begin(), s.end(), t);
  if (it == s.end()) return seg.measures.back();
  const auto k = static_cast<std::size_t>(it - s.begin()) - 1;
  const double theta = (t - s[k]) / (s[k + 1] - s[k]);
  if (theta == 0.0) return seg.measures[k];
  const auto lo = pushforward_measure(v, s[k], t, seg.measures[k], step_h);
  const auto hi = pushforward_measure(v, s[k + 1], t, seg.measures[k + 1], step_h);
  return linear_combine(1.0 - theta, lo, theta, hi);
}

DiscreteSignedMeasure measure_at(const Trajectory& traj, const VelocityField& v, double t,
                                 double step_h) {
  const auto& s = traj.times;
  if (s.empty() || t < s.front() || t > s.back())
    throw ContractViolation("measure_at: time outside the trajectory");
  auto it = std::lower_bound(s.begin(), s.end(), t);
  const auto k = static_cast<std::size_t>(it - s.begin());
  if (*it == t) return traj.measures[k];
  Segment seg{{s[k - 1], s[k]}, {traj.measures[k - 1], traj.measures[k]}};
  return interpolate_segment(seg, v, t, step_h);
}

// ---------------------------------------------------------------------------
// Density-level iteration.

namespace {

class DensityTransport {
 public:
  DensityTransport(const VelocityField& v, const std::vector<double>& nodes, const GridDensity& grid,
                   double max_h, Exec exec)
      : exec_(exec), feet_(nodes.size()) {
    const double h = std::min(max_h, nodes.size() > 1 ? nodes[1] - nodes[0] : max_h);
    for (std::size_t k = 1; k < nodes.size(); ++k) {
      feet_[k].resize(grid.cell_count());
      kernels::trace_feet(v, nodes[k], nodes[k - 1], h, grid, feet_[k], exec);
    }
  }

  GridDensity advance(std::size_t k, const GridDensity& u, double factor) const {
    std::vector<double> vals(u.cell_count());
    kernels::pull_back(u, feet_[k], vals, exec_);
    if (factor != 1.0)
      for (double& x : vals) x *= factor;
    return with_values(u, std::move(vals));
  }

 private:
  Exec exec_;
  std::vector<std::vector<FlowSample>> feet_;
};

std::vector<GridDensity> density_sweep(const ReactionSpec& spec, const DensityTransport& transport,
                                       const std::vector<double>& s, double c,
                                       const std::vector<GridDensity>& base,
                                       const std::vector<GridDensity>& curve) {
  const std::size_t n = s.size();
  std::vector<GridDensity> g(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto fk = spec.density_action(s[k], curve[k]);
    g[k] = c == 0.0 ? fk : combine(1.0, fk, c, curve[k]);
  }
  std::vector<GridDensity> out(n);
  out[0] = base[0];
  GridDensity carry = combine(0.5, g[0], 0.0, g[0]);
  for (std::size_t k = 1; k < n; ++k) {
    const double dt = s[k] - s[k - 1];
    const auto a = transport.advance(k, carry, std::exp(-c * dt));
    const double head = std::exp(-c * (s[k] - s[0]));
    out[k] = combine(head, base[k], dt, combine(1.0, a, 0.5, g[k]));
    carry = combine(1.0, a, 1.0, g[k]);
  }
  return out;
}

}  // namespace

DensitySegment solve_density_interval(const ReactionSpec& spec, const VelocityField& v, double t0,
                                      double tau, const GridDensity& phi, double c,
                                      const SolverConfig& config) {
  if (!spec.density_compatible())
    throw ContractViolation(fmt::format("reaction '{}' has no density action", spec.name));
  const auto nodes = uniform_nodes(t0, tau, config.quad_nodes);
  const DensityTransport transport(v, nodes, phi, config.flow_step_h, config.exec);
  std::vector<GridDensity> base(nodes.size());
  base[0] = phi;
  for (std::size_t k = 1; k < nodes.size(); ++k) base[k] = transport.advance(k, base[k - 1], 1.0);

  const double tol = config.picard_tol * std::max(1.0, phi.mass());
  std::vector<GridDensity> curve = base;
  DensitySegment res;
  for (int it = 1; it <= config.picard_max_iter; ++it) {
    auto next = density_sweep(spec, transport, nodes, c, base, curve);
    double d = 0.0;
    for (std::size_t k = 0; k < nodes.size(); ++k) d = std::max(d, l1_distance(next[k], curve[k]));
    curve = std::move(next);
    res.picard_iters = it;
    res.residual = d;
    if (!std::isfinite(d)) throw NumericalFailure("density Picard iteration produced non-finite values");
    if (d <= tol) {
      res.times = nodes;
      res.densities = std::move(curve);
      return res;
    }
  }
  throw NonContraction(fmt::format("density Picard iteration on [{}, {}] did not converge", t0,
                                   t0 + tau),
                       0.0);
}

// ---------------------------------------------------------------------------
// Intervals and chaining.

Trajectory solve_interval(const ReactionSpec& spec, const VelocityField& v, double t0, double tau,
                          const DiscreteSignedMeasure& nu, const SolverConfig& config,
                          const GridDensity* density) {
  config.validate();
  if (!(tau > 0.0)) throw ContractViolation("solve_interval: tau must be positive");
  const double radius = tv_norm(nu);
  const double delta = effective_delta(config, radius);

  Dilation dil;
  bool dilate = false;
  switch (config.dilation_mode) {
    case DilationMode::none:
      break;
    case DilationMode::automatic:
      dilate = nu.is_positive() && static_cast<bool>(spec.c_pos);
      if (dilate) {
        // The iterates live in the ball of radius R + delta <= 2 max(R, delta).
        const double lv = lipschitz_bound(v, t0, t0 + tau);
        dil = choose_dilation(spec, std::max(radius, delta), t0 + tau, tau, lv,
                              config.contraction_target);
      }
      break;
    case DilationMode::fixed: {
      dilate = true;
      dil.c = config.dilation_c;
      const double lv = lipschitz_bound(v, t0, t0 + tau);
      dil.pieces = dilation_pieces(spec.l_f(radius + delta), dil.c, tau, lv,
                                   config.contraction_target);
      break;
    }
  }
  if (!dilate) dil = Dilation{};

  Trajectory traj;
  traj.times.push_back(t0);
  traj.measures.push_back(nu);
  StepDiagnostics first;
  first.tv_norm = radius;
  first.neg_part_tv = neg_part(nu);
  if (density) {
    traj.densities.push_back(*density);
    first.lp_norm = density->lp_norm();
  }
  traj.diagnostics.push_back(first);

  const double piece_tau = tau / dil.pieces;
  for (int p = 0; p < dil.pieces; ++p) {
    const double a = p == 0 ? t0 : traj.times.back();
    const double len = p + 1 == dil.pieces ? t0 + tau - a : piece_tau;
    const auto piece = picard_iterate(spec, v, dil.c, a, len, traj.measures.back(), config);
    std::optional<DensitySegment> dseg;
    if (density) {
      dseg = solve_density_interval(spec, v, a, len, traj.densities.back(), dil.c, config);
    }
    IntervalInfo info;
    info.t0 = a;
    info.tau = len;
    info.radius = tv_norm(traj.measures.back());
    info.delta = delta;
    info.dilation_c = dil.c;
    info.pieces = dil.pieces;
    info.picard_iters = piece.iters;
    info.contraction_ratio = piece.ratio;
    info.residual = piece.residual;
    traj.intervals.push_back(info);
    for (std::size_t k = 1; k < piece.times.size(); ++k) {
      StepDiagnostics dg;
      dg.tv_norm = tv_norm(piece.measures[k]);
      dg.neg_part_tv = neg_part(piece.measures[k]);
      dg.fm_step_distance = fm_distance(piece.measures[k], piece.measures[k - 1]);
      dg.picard_iters = piece.iters;
      dg.contraction_ratio = piece.ratio;
      traj.times.push_back(piece.times[k]);
      traj.measures.push_back(piece.measures[k]);
      if (dseg) {
        dg.lp_norm = dseg->densities[k].lp_norm();
        traj.densities.push_back(dseg->densities[k]);
      }
      traj.diagnostics.push_back(dg);
    }
  }
  return traj;
}

Trajectory solve_maximal(const ReactionSpec& spec, const VelocityField& v,
                         const DiscreteSignedMeasure& nu, double t0, double horizon,
                         const SolverConfig& config, const std::optional<GridDensity>& density) {
  config.validate();
  if (!(horizon > t0)) throw ContractViolation("solve_maximal: horizon must exceed t0");
  if (density && !spec.density_compatible())
    throw ContractViolation(fmt::format("reaction '{}' cannot act on densities", spec.name));

  const double nu_tv = tv_norm(nu);
  const double tv_limit =
      config.tv_blowup_threshold > 0.0 ? config.tv_blowup_threshold : 1e6 * (nu_tv > 0.0 ? nu_tv : 1.0);
  double lp_limit = std::numeric_limits<double>::infinity();
  if (density) {
    const double n0 = density->lp_norm();
    lp_limit = config.lp_blowup_threshold > 0.0 ? config.lp_blowup_threshold
                                                : 1e6 * (n0 > 0.0 ? n0 : 1.0);
  }

  Trajectory traj;
  traj.times.push_back(t0);
  traj.measures.push_back(nu);
  StepDiagnostics first;
  first.tv_norm = nu_tv;
  first.neg_part_tv = neg_part(nu);
  if (density) {
    traj.densities.push_back(*density);
    first.lp_norm = density->lp_norm();
  }
  traj.diagnostics.push_back(first);

  const double min_step = 1e-12 * std::max(1.0, horizon - t0);
  double t = t0;
  while (horizon - t > min_step) {
    const double radius = tv_norm(traj.measures.back());
    const double delta = effective_delta(config, radius);
    const double cap = std::min(config.max_step, horizon - t);
    double tau = choose_step(spec, v, t, radius, delta, cap, config.contraction_target);
    if (horizon - (t + tau) <= min_step) tau = horizon - t;
    if (tau < min_step) {
      traj.blowup = true;
      traj.blowup_time = t;
      traj.stop_reason = fmt::format("time step collapsed to {:.3g} at t = {:.6g}", tau, t);
      break;
    }

    Trajectory piece;
    try {
      piece = solve_interval(spec, v, t, tau, traj.measures.back(), config,
                             density ? &traj.densities.back() : nullptr);
    } catch (const NumericalFailure& e) {
      traj.blowup = true;
      traj.blowup_time = t;
      traj.stop_reason = fmt::format("numerical failure at t = {:.6g}: {}", t, e.what());
      break;
    }

    for (const auto& info : piece.intervals) traj.intervals.push_back(info);
    for (std::size_t k = 1; k < piece.times.size(); ++k) {
      const auto& dg = piece.diagnostics[k];
      if (!(dg.tv_norm <= tv_limit)) {
        traj.blowup = true;
        traj.blowup_time = traj.times.back();
        traj.stop_reason = fmt::format("TV norm exceeded {:.6g} after t = {:.9g}", tv_limit,
                                       traj.blowup_time);
        break;
      }
      if (density && !(dg.lp_norm <= lp_limit)) {
        traj.lp_blowup = true;
        traj.lp_blowup_time = traj.times.back();
        traj.stop_reason = fmt::format("L^p norm exceeded {:.6g} after t = {:.9g}", lp_limit,
                                       traj.lp_blowup_time);
        break;
      }
      traj.times.push_back(piece.times[k]);
      traj.measures.push_back(piece.measures[k]);
      if (density) traj.densities.push_back(piece.densities[k]);
      traj.diagnostics.push_back(dg);
    }
    if (traj.blowup || traj.lp_blowup) break;
    t = traj.times.back();
  }
  traj.horizon_reached = !traj.blowup && !traj.lp_blowup;
  if (traj.horizon_reached) traj.stop_reason = "horizon reached";
  return traj;
}

}  // namespace mvt
