#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>

#include "mvt/cli.hpp"
#include "mvt/parallel.hpp"

#ifndef MVT_SCENARIO_DIR
#define MVT_SCENARIO_DIR "scenarios"
#endif

int main(int argc, char** argv) {
  CLI::App app{"Transport-reaction equations for measures: mild solutions and invariance checks"};
  app.require_subcommand(1);

  std::string config;
  std::string out_dir = ".";
  std::optional<std::uint64_t> sim_seed;
  auto* sim = app.add_subcommand("simulate", "Solve a scenario and write trajectory.csv and snapshots");
  sim->add_option("--config", config, "Scenario JSON file")->required();
  sim->add_option("--out", out_dir, "Parent directory for the scenario output directory");
  sim->add_option("--seed", sim_seed, "Override the scenario seed");

  std::string suite;
  std::uint64_t seed = 42;
  std::string scenario_dir = MVT_SCENARIO_DIR;
  auto* verify = app.add_subcommand("verify", "Run invariance checks over the bundled scenarios");
  verify->add_option("--suite", suite, "positivity | lp | weaklimit | dependence | all")->required();
  verify->add_option("--seed", seed, "Seed for randomized initial data");
  verify->add_option("--scenarios", scenario_dir, "Scenario directory");

  std::string a, b;
  bool torus = false;
  auto* metric = app.add_subcommand("metric", "Flat distance between two measure CSV files");
  metric->add_option("a", a)->required();
  metric->add_option("b", b)->required();
  metric->add_flag("--torus", torus, "Read both measures on the flat torus");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : mvt::kExitConfig;
  }

  mvt::configure_threads_from_env();

  if (*sim) return mvt::run_simulate(config, out_dir, sim_seed, std::cout, std::cerr);
  if (*verify) return mvt::run_verify(suite, scenario_dir, seed, std::cout, std::cerr);
  return mvt::run_metric(a, b, torus ? mvt::DomainKind::torus : mvt::DomainKind::euclidean, std::cout, std::cerr);
}
