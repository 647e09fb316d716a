#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mvt/grid_density.hpp"
#include "mvt/invariance.hpp"
#include "mvt/measure.hpp"
#include "mvt/mild_solver.hpp"

namespace mvt {

/// Options for `mvt verify`.
struct VerifyOptions {
  std::vector<std::string> suites;  // subset of positivity, lp, dependence
  double perturb_scale = 1.0;       // nu2 = perturb_scale * shifted nu
  std::vector<double> perturb_shift;
  double lp_p = 0.0;  // 0: the density's own exponent
};

/// A parsed scenario file. See scenarios/README.md for the schema.
struct Scenario {
  std::string name;
  std::uint64_t seed = 42;
  Domain domain;
  std::string field_name;
  std::vector<double> field_params;
  std::string reaction_name;
  std::vector<double> reaction_params;
  DiscreteSignedMeasure nu;
  std::optional<GridDensity> density;  // set when densities are co-evolved
  double t0 = 0.0;
  double horizon = 1.0;
  SolverConfig solver;
  int snapshots = 5;
  VerifyOptions verify;

  Problem problem() const;
  /// nu shifted by verify.perturb_shift and scaled by verify.perturb_scale.
  DiscreteSignedMeasure perturbed_initial() const;
};

/// Parses JSON text. Relative CSV paths resolve against `base_dir`.
/// Unknown keys, wrong types and out-of-range values throw ConfigError
/// naming the offending field.
Scenario parse_scenario(const std::string& text, const std::filesystem::path& base_dir,
                        std::optional<std::uint64_t> seed_override = std::nullopt);

Scenario load_scenario(const std::filesystem::path& path,
                       std::optional<std::uint64_t> seed_override = std::nullopt);

/// *.json files of a directory in lexicographic order.
std::vector<std::filesystem::path> scenario_files(const std::filesystem::path& dir);

}  // namespace mvt
