#include "mvt/cli.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <cmath>
#include <fstream>
#include <algorithm>
#include <functional>
#include <limits>

#include "mvt/errors.hpp"
#include "mvt/flat_metric.hpp"
#include "mvt/invariance.hpp"
#include "mvt/measure_io.hpp"
#include "mvt/scenario.hpp"

namespace mvt {

namespace {

std::string num(double x) { return fmt::format("{:.17g}", x); }

std::vector<std::size_t> snapshot_indices(std::size_t n, int count) {
  std::vector<std::size_t> idx;
  if (n == 0 || count <= 0) return idx;
  if (count == 1 || n == 1) return {n - 1};
  for (int k = 0; k < count; ++k) {
    const auto i = static_cast<std::size_t>(std::llround(static_cast<double>(n - 1) * k / (count - 1)));
    if (idx.empty() || idx.back() != i) idx.push_back(i);
  }
  return idx;
}

// Runs `body`, mapping library errors to exit codes.
int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    fmt::print(err, "config error: {}\n", e.what());
    return kExitConfig;
  } catch (const NonContraction& e) {
    fmt::print(err, "non-contraction: {} (measured ratio {:.4g})\n", e.what(), e.measured_ratio());
    return kExitNonContraction;
  } catch (const DomainMismatch& e) {
    fmt::print(err, "domain mismatch: {}\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitFailure;
  }
}

}  // namespace

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  out << "t,tv_norm,neg_part_tv,fm_step_distance,picard_iters,contraction_ratio,lp_norm\n";
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    const auto& d = traj.diagnostics[k];
    out << num(traj.times[k]) << ',' << num(d.tv_norm) << ',' << num(d.neg_part_tv) << ','
        << num(d.fm_step_distance) << ',' << d.picard_iters << ',' << num(d.contraction_ratio) << ','
        << (std::isnan(d.lp_norm) ? std::string("nan") : num(d.lp_norm)) << '\n';
  }
}

int run_simulate(const std::filesystem::path& config, const std::filesystem::path& out_dir,
                 std::optional<std::uint64_t> seed, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Scenario sc = load_scenario(config, seed);
    const Problem pr = sc.problem();
    const Trajectory tr = solve_maximal(pr.spec, pr.field, pr.nu, pr.t0, pr.horizon, sc.solver, pr.density);

    const auto dir = out_dir / sc.name;
    std::filesystem::create_directories(dir);
    {
      std::ofstream f(dir / "trajectory.csv");
      write_trajectory_csv(f, tr);
      if (!f) throw Error(fmt::format("cannot write {}", (dir / "trajectory.csv").string()));
    }
    std::ofstream index(dir / "snapshots.csv");
    index << "index,t,measure_file" << (tr.densities.empty() ? "" : ",density_file") << '\n';
    for (std::size_t i : snapshot_indices(tr.times.size(), sc.snapshots)) {
      const auto name = fmt::format("snapshot_{:04d}.csv", i);
      write_measure_csv(dir / name, tr.measures[i]);
      index << i << ',' << num(tr.times[i]) << ',' << name;
      if (!tr.densities.empty()) {
        const auto dname = fmt::format("density_{:04d}.csv", i);
        write_grid_csv(dir / dname, tr.densities[i]);
        index << ',' << dname;
      }
      index << '\n';
    }

    fmt::print(out, "scenario={} final_time={:.10g} final_tv={:.10g} blowup={} lp_blowup={} steps={}\n", sc.name,
               tr.times.back(), tr.diagnostics.back().tv_norm, tr.blowup ? "true" : "false",
               tr.lp_blowup ? "true" : "false", tr.times.size() - 1);
    fmt::print(out, "stop: {}\noutput: {}\n", tr.stop_reason, dir.string());
    return kExitOk;
  });
}

int run_verify(const std::string& suite, const std::filesystem::path& scenario_dir, std::uint64_t seed,
               std::ostream& out, std::ostream& err) {
  const bool all = suite == "all";
  if (!all && suite != "positivity" && suite != "lp" && suite != "weaklimit" && suite != "dependence") {
    fmt::print(err, "unknown suite '{}' (expected positivity, lp, weaklimit, dependence or all)\n", suite);
    return kExitConfig;
  }
  return guarded(err, [&] {
    int reports = 0;
    int failed = 0;
    auto emit = [&](const CheckReport& r) {
      ++reports;
      if (!r.passed) ++failed;
      fmt::print(out, "{}\n", format_report(r));
    };
    auto wants = [&](const Scenario& sc, const std::string& name) {
      if (!all && suite != name) return false;
      return std::find(sc.verify.suites.begin(), sc.verify.suites.end(), name) != sc.verify.suites.end();
    };

    if (suite != "weaklimit") {
      for (const auto& path : scenario_files(scenario_dir)) {
        const Scenario sc = load_scenario(path, seed);
        const Problem pr = sc.problem();
        if (wants(sc, "positivity")) emit(check_positivity(pr, sc.solver));
        if (wants(sc, "lp")) {
          if (!pr.density) throw ConfigError(fmt::format("{}: suite lp needs a density", path.string()));
          emit(check_lp_invariance(pr, sc.verify.lp_p > 0.0 ? sc.verify.lp_p : pr.density->p, sc.solver));
        }
        if (wants(sc, "dependence"))
          emit(check_continuous_dependence(pr, pr.nu, sc.perturbed_initial(), sc.solver));
      }
    }
    if (all || suite == "weaklimit") {
      std::vector<double> up;
      for (int n = 1; n <= 1000; ++n) up.push_back(0.5 * (1.0 + 1.0 / n));
      emit(weak_limit_experiment(2.0, up, 0.5));
      emit(weak_limit_experiment(std::numeric_limits<double>::infinity(), up, 0.5));
      std::vector<double> shrink;
      for (int n = 1; n <= 100; ++n) shrink.push_back(1.0 / n);
      emit(weak_limit_experiment(1.0, shrink, 0.0));
    }
    fmt::print(out, "suite={} reports={} failed={}\n", suite, reports, failed);
    return failed == 0 ? kExitOk : kExitFailure;
  });
}

int run_metric(const std::filesystem::path& a, const std::filesystem::path& b, DomainKind kind,
               std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    for (const auto& p : {a, b})
      if (!std::filesystem::exists(p)) throw ConfigError(fmt::format("file not found: {}", p.string()));
    const auto mu = read_measure_csv(a, kind);
    const auto nu = read_measure_csv(b, kind);
    fmt::print(out, "{:.12g}\n", fm_distance(mu, nu));
    return kExitOk;
  });
}

}  // namespace mvt
