#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mvt/grid_density.hpp"
#include "mvt/measure.hpp"
#include "mvt/mild_solver.hpp"
#include "mvt/reaction.hpp"
#include "mvt/velocity_field.hpp"

namespace mvt {

/// Everything a check needs to run the solver.
struct Problem {
  std::string name;
  ReactionSpec spec;
  VelocityField field;
  DiscreteSignedMeasure nu;
  std::optional<GridDensity> density;  // nu's density when it has one
  double t0 = 0.0;
  double horizon = 1.0;
};

/// passed == every observed[i] <= bound[i] + tolerance, or
/// observed[i] <= bound[i] * tolerance when `multiplicative`. Checks whose
/// natural direction is ">=" store the pair swapped. `series` holds
/// auxiliary sequences for plotting.
struct CheckReport {
  std::string name;
  bool passed = false;
  std::vector<double> observed;
  std::vector<double> bound;
  double tolerance = 0.0;
  bool multiplicative = false;
  std::string notes;
  std::map<std::string, std::vector<double>> series;
};

/// Applies the pass rule to observed/bound/tolerance.
bool within_bounds(const CheckReport& r);

/// One line of `key=value` fields.
std::string format_report(const CheckReport& r);

/// max_t neg_part_tv under automatic dilation, bound 0, tolerance
/// 1e-8 ||nu||_TV. The notes record the undilated negative control.
CheckReport check_positivity(const Problem& problem, const SolverConfig& config);

/// Co-evolves the density and compares ||phi_t||_p with 2 D ||phi_{t'}||_p
/// on chained sub-intervals of length min(tau', ||phi_{t'}|| / (B_r + c r)),
/// r = 2 D ||phi_{t'}||.
CheckReport check_lp_invariance(const Problem& problem, double p, const SolverConfig& config);

/// Tolerance used by check_lp_invariance for a grid.
double lp_grid_tolerance(const GridDensity& phi0);

/// Gaussian sequence N(0, sigma_n^2) in 1D. For target_sigma > 0 checks
/// ||f_*||_p <= min of the last five ||f_n||_p (+1e-3). For target_sigma = 0
/// and p = 1 checks the concentration signature instead.
CheckReport weak_limit_experiment(double p, const std::vector<double>& sigmas, double target_sigma);

/// Cell averages of N(mean, sigma^2) on a 1D grid over [lo, hi].
GridDensity gaussian_cells_1d(int cells, double lo, double hi, double mean, double sigma, double p);

/// observed = fm(mu1_t, mu2_t) / fm(nu1, nu2), bound = e^{omega (t - t0)}
/// with omega = sup lip(v) + l_f(R) L^v_{t0,T}; tolerance is multiplicative 1.1.
CheckReport check_continuous_dependence(const Problem& problem, const DiscreteSignedMeasure& nu1,
                                        const DiscreteSignedMeasure& nu2,
                                        const SolverConfig& config);

/// The Groenwall rate used above.
double dependence_rate(const Problem& problem, double radius);

}  // namespace mvt
