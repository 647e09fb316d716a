#pragma once

#include <cstddef>
#include <vector>

#include "mvt/measure.hpp"

namespace mvt {

enum class LpStatus { optimal, infeasible_numerics };

/// Outcome of the flat-norm LP.
///
/// `optimal_f_values[i]` is the optimal test-function value at atom i of the
/// (coalesced) input; the optimum is not unique, only `value` is.
struct FlatNormResult {
  double value = 0.0;
  std::vector<double> optimal_f_values;
  LpStatus status = LpStatus::optimal;
  std::size_t pivots = 0;
};

/// Fortet-Mourier (flat) norm
///   sup { sum_i w_i f_i : |f_i| <= 1, |f_i - f_j| <= d(x_i, x_j) }
/// solved exactly by a revised simplex method on the dual transport LP.
/// Pairs with d >= 2 are dropped since the box already implies them.
FlatNormResult fm_norm(const DiscreteSignedMeasure& mu);

/// fm_norm(mu - nu).value. Throws DomainMismatch or NumericalFailure.
double fm_distance(const DiscreteSignedMeasure& mu, const DiscreteSignedMeasure& nu);

/// Independent check of fm_norm by enumerating every vertex of the feasible
/// polytope. Vertices correspond to oriented spanning trees of tight
/// constraints on the support plus a ground node (f = 0). Exponential cost:
/// throws std::invalid_argument above kOracleMaxAtoms atoms.
inline constexpr std::size_t kOracleMaxAtoms = 8;
double fm_norm_oracle(const DiscreteSignedMeasure& mu);

}  // namespace mvt
