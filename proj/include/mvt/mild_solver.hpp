#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "mvt/grid_density.hpp"
#include "mvt/measure.hpp"
#include "mvt/parallel.hpp"
#include "mvt/reaction.hpp"
#include "mvt/velocity_field.hpp"

namespace mvt {

enum class DilationMode { none, automatic, fixed };

struct SolverConfig {
  double delta = 1.0;           // TV cushion
  double delta_relative = 0.0;  // effective cushion is max(delta, delta_relative * R)
  int quad_nodes = 33;
  double picard_tol = 1e-8;
  int picard_max_iter = 100;
  double flow_step_h = 1e-2;  // largest RK4 step
  double tv_blowup_threshold = 0.0;  // 0: 1e6 * ||nu||_TV
  double lp_blowup_threshold = 0.0;  // 0: 1e6 * ||phi_0||_p
  DilationMode dilation_mode = DilationMode::automatic;
  double dilation_c = 0.0;  // used by DilationMode::fixed
  double max_step = std::numeric_limits<double>::infinity();
  double contraction_target = 0.5;
  Exec exec = Exec::parallel;

  /// Throws ConfigError on out-of-range values.
  void validate() const;
};

/// Measures on the uniform node grid t0 = s_0 < ... < s_K = t0 + tau.
struct Segment {
  std::vector<double> times;
  std::vector<DiscreteSignedMeasure> measures;
};

std::vector<double> uniform_nodes(double t0, double tau, int count);

/// Time t within a segment: (1 - theta) P_{s_k,t} mu_k + theta P_{s_{k+1},t} mu_{k+1}.
DiscreteSignedMeasure interpolate_segment(const Segment& seg, const VelocityField& v, double t,
                                          double step_h);

struct StepDiagnostics {
  double tv_norm = 0.0;
  double neg_part_tv = 0.0;
  double fm_step_distance = 0.0;
  int picard_iters = 0;
  double contraction_ratio = 0.0;
  double lp_norm = std::numeric_limits<double>::quiet_NaN();
};

struct IntervalInfo {
  double t0 = 0.0;
  double tau = 0.0;
  double radius = 0.0;  // ||mu_{t0}||_TV
  double delta = 0.0;
  double dilation_c = 0.0;
  int pieces = 1;
  int picard_iters = 0;
  double contraction_ratio = 0.0;
  double residual = 0.0;  // sup_k fm(Psi(mu)(s_k), mu(s_k)) of the returned curve
};

struct Trajectory {
  std::vector<double> times;
  std::vector<DiscreteSignedMeasure> measures;
  std::vector<GridDensity> densities;  // empty, or one per time
  std::vector<StepDiagnostics> diagnostics;
  std::vector<IntervalInfo> intervals;
  bool horizon_reached = false;
  bool blowup = false;     // TV threshold or step collapse
  bool lp_blowup = false;  // density L^p threshold
  double blowup_time = std::numeric_limits<double>::quiet_NaN();     // last valid time (T*)
  double lp_blowup_time = std::numeric_limits<double>::quiet_NaN();  // last valid time (T-hat*)
  std::string stop_reason;
};

/// tau = min(delta / c_f(R + delta), 1 / (2 l_f(R + delta) L^v), cap), where the
/// factor 2 is 1/contraction_target. This overload takes L^v as given.
double choose_step(const ReactionSpec& spec, double radius, double delta, double lv = 1.0,
                   double cap = std::numeric_limits<double>::infinity(),
                   double contraction_target = 0.5);

/// Same with L^v = lipschitz_bound(v, t0, t0 + tau) evaluated on the candidate step.
double choose_step(const ReactionSpec& spec, const VelocityField& v, double t0, double radius,
                   double delta, double cap, double contraction_target = 0.5);

struct Dilation {
  double c = 0.0;
  int pieces = 1;
};

/// c = c_pos(2R, T); pieces = smallest N with
/// (l_f(2R) + c) l_v (1 - exp(-c tau / N)) / c < target  (limit form for c = 0).
Dilation choose_dilation(const ReactionSpec& spec, double radius, double horizon, double tau,
                         double lv, double target = 1.0);

/// Smallest N for an explicit c and Lipschitz constant l.
int dilation_pieces(double l, double c, double tau, double lv, double target);

/// One application of the Picard operator on the node grid of `curve`.
Segment picard_step(const ReactionSpec& spec, const VelocityField& v, double t0, double tau,
                    const Segment& curve, const SolverConfig& config = {});

/// Dilated Picard operator with shift c >= 0.
Segment picard_step_dilated(const ReactionSpec& spec, const VelocityField& v, double c, double t0,
                            double tau, const Segment& curve, const SolverConfig& config = {});

/// Picard iteration on [t0, t0 + tau] from nu, with dilation per config.
/// Throws NonContraction when picard_max_iter is exceeded.
Trajectory solve_interval(const ReactionSpec& spec, const VelocityField& v, double t0, double tau,
                          const DiscreteSignedMeasure& nu, const SolverConfig& config,
                          const GridDensity* density = nullptr);

/// Chains solve_interval up to the horizon or until blow-up.
Trajectory solve_maximal(const ReactionSpec& spec, const VelocityField& v,
                         const DiscreteSignedMeasure& nu, double t0, double horizon,
                         const SolverConfig& config,
                         const std::optional<GridDensity>& density = std::nullopt);

/// Density-level Picard iteration on [t0, t0 + tau] with shift c, using
/// pushforward_density and spec.density_action under the same quadrature.
struct DensitySegment {
  std::vector<double> times;
  std::vector<GridDensity> densities;
  int picard_iters = 0;
  double residual = 0.0;  // final sup_k L^1 update
};

DensitySegment solve_density_interval(const ReactionSpec& spec, const VelocityField& v, double t0,
                                      double tau, const GridDensity& phi, double c,
                                      const SolverConfig& config);

/// The trajectory at time t: the stored measure when t is a stored time,
/// otherwise interpolate_segment between the neighbouring stored times.
DiscreteSignedMeasure measure_at(const Trajectory& traj, const VelocityField& v, double t,
                                 double step_h);

/// Effective TV cushion for a radius R.
double effective_delta(const SolverConfig& config, double radius);

}  // namespace mvt
