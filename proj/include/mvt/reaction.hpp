#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mvt/grid_density.hpp"
#include "mvt/measure.hpp"

namespace mvt {

/// Reaction term f_t(mu) = p_t(mu) + F_t(mu) * mu together with the constants
/// the solver relies on:
///   c_f(R)       bound on ||f_t(mu)||_TV for ||mu||_TV <= R
///   l_f(R)       Lipschitz constant of f_t in the flat norm on that ball
///   c_pos(R, T)  bound on ||F_t(mu)||_inf for positive mu, ||mu|| <= R, t <= T
///   lp_bound(p, r, t', t)  bound on ||f_s(phi)||_p for ||phi||_p <= r, s in [t', t]
/// Empty `production`/`rate` mean zero. `c_pos`, `lp_bound` and
/// `density_action` are optional.
struct ReactionSpec {
  std::string name;
  Domain domain;
  std::function<DiscreteSignedMeasure(double, const DiscreteSignedMeasure&)> production;
  std::function<BoundedLipschitzFunction(double, const DiscreteSignedMeasure&)> rate;
  std::function<double(double)> c_f;
  std::function<double(double)> l_f;
  std::function<double(double, double)> c_pos;
  std::function<double(double, double, double, double)> lp_bound;
  std::function<GridDensity(double, const GridDensity&)> density_action;

  bool has_production() const noexcept { return static_cast<bool>(production); }
  bool density_compatible() const noexcept {
    return static_cast<bool>(lp_bound) && static_cast<bool>(density_action);
  }
};

/// p_t(mu) + F_t(mu) * mu. Throws ContractViolation if the production term
/// returns a measure with a negative part.
DiscreteSignedMeasure eval_reaction(const ReactionSpec& spec, double t,
                                    const DiscreteSignedMeasure& mu);

/// Extra information some builtins need. `box_volume` is the Lebesgue
/// measure of the region densities live on (used by logistic's lp_bound).
struct ReactionContext {
  Domain domain;
  double box_volume = 1.0;
};

/// Builtins (parameters in brackets):
///   zero            []
///   linear_rate     [c]                         F = c
///   logistic        [r, K]                      F = r (1 - mu(Omega)/K)
///   death_rate      [d]                         F = -d
///   dirac_source    [sigma, x0_1..x0_d]         p = sigma delta_x0
///   smoothed_source [sigma, w, x0_1..x0_d (, k)] p = sigma * bump of radius w, k atoms
///   mass_feedback   [k]                         F = k mu(Omega)
/// Throws ConfigError on unknown names or wrong arity.
ReactionSpec builtin_reaction(const std::string& name, const std::vector<double>& params,
                              const ReactionContext& ctx);

/// Normalized bump (1 - |x - x0|^2 / w^2)^2 on the ball of radius w; integrates to 1.
double bump_density(const Domain& domain, const Point& x0, double width, const Point& x);

/// ||bump||_p for the normalized bump in dimension d.
double bump_lp_norm(int dim, double width, double p);

struct AssumptionReport {
  std::size_t samples = 0;
  std::vector<std::string> violations;
  double worst_lipschitz_ratio = 0.0;  // observed / l_f(R)
  double worst_tv_ratio = 0.0;         // observed / c_f(R)
  double worst_rate_ratio = 0.0;       // observed / c_pos(R, T)

  bool ok() const noexcept { return violations.empty(); }
};

/// Monte-Carlo falsification of the declared constants on random measures
/// with ||mu||_TV <= R at times in [0, T]. Report-only.
AssumptionReport verify_assumptions(const ReactionSpec& spec, std::size_t samples, double radius,
                                    std::uint64_t seed = 42, double horizon = 1.0);

}  // namespace mvt
