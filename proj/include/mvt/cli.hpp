#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "mvt/mild_solver.hpp"

namespace mvt {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNonContraction = 3;

/// Columns: t,tv_norm,neg_part_tv,fm_step_distance,picard_iters,contraction_ratio,lp_norm
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

/// Runs solve_maximal and writes <out_dir>/<name>/{trajectory.csv,
/// snapshots.csv, snapshot_NNNN.csv[, density_NNNN.csv]}.
int run_simulate(const std::filesystem::path& config, const std::filesystem::path& out_dir,
                 std::optional<std::uint64_t> seed, std::ostream& out, std::ostream& err);

/// Suites: positivity, lp, weaklimit, dependence, all.
int run_verify(const std::string& suite, const std::filesystem::path& scenario_dir, std::uint64_t seed,
               std::ostream& out, std::ostream& err);

int run_metric(const std::filesystem::path& a, const std::filesystem::path& b, DomainKind kind,
               std::ostream& out, std::ostream& err);

}  // namespace mvt
