#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include "resmgm/experiment.hpp"
#include "resmgm/oracle.hpp"

namespace {

std::ostream* open_output(const std::string& path, std::unique_ptr<std::ofstream>& holder,
                          std::ios::openmode mode) {
  if (path == "-") return &std::cout;
  holder = std::make_unique<std::ofstream>(path, mode);
  if (!*holder) throw resmgm::ConfigError("cannot open '" + path + "' for writing");
  return holder.get();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RESMGM resource-allocation simulator"};
  app.require_subcommand(1);

  std::string config_path;
  bool validate_oracle = false;
  std::optional<std::string> trace_path;
  std::optional<std::string> schedule;
  std::optional<std::uint64_t> seed_base;
  std::optional<std::string> csv_path;
  std::optional<int> jobs;

  CLI::App* run = app.add_subcommand("run", "Run the experiment described by a config file");
  run->add_option("config", config_path, "JSON config document")->required();
  run->add_flag("--validate-oracle", validate_oracle,
                "Add oracle_cost and optimality_gap columns (small instances only)");
  run->add_option("--trace", trace_path, "Write one JSON line per message to this file");
  run->add_option("--schedule", schedule, "deterministic or concurrent")
      ->check(CLI::IsMember({"deterministic", "concurrent"}));
  run->add_option("--seed-base", seed_base, "First seed of the sweep");
  run->add_option("--output", csv_path, "CSV destination, '-' for standard output");
  run->add_option("--jobs", jobs, "Sweep points evaluated concurrently")
      ->check(CLI::PositiveNumber);

  std::string scenario_config;
  int sweep_value = 0;
  std::uint64_t scenario_seed = 0;
  CLI::App* dump =
      app.add_subcommand("scenario", "Print one generated scenario as a config document");
  dump->add_option("config", scenario_config, "JSON config document")->required();
  dump->add_option("--sweep-value", sweep_value, "Sweep point to generate");
  dump->add_option("--seed", scenario_seed, "Scenario seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      resmgm::ExperimentConfig config = resmgm::load_experiment_config(config_path);
      if (validate_oracle) config.validate_oracle = true;
      if (trace_path) config.trace_path = trace_path;
      if (schedule) config.schedule = resmgm::parse_schedule(*schedule);
      if (seed_base) config.seed_base = *seed_base;
      if (csv_path) config.csv_path = *csv_path;
      if (jobs) config.jobs = *jobs;

      std::error_code ec;
      const bool fresh = config.csv_path == "-" || !std::filesystem::exists(config.csv_path, ec) ||
                         std::filesystem::file_size(config.csv_path, ec) == 0;
      std::unique_ptr<std::ofstream> csv_file;
      std::unique_ptr<std::ofstream> trace_file;
      std::ostream* csv = open_output(config.csv_path, csv_file, std::ios::app);
      std::ostream* trace = config.trace_path
                                ? open_output(*config.trace_path, trace_file, std::ios::trunc)
                                : nullptr;
      resmgm::run_experiment(config, *csv, trace, fresh);
    } else {
      const resmgm::ExperimentConfig config = resmgm::load_experiment_config(scenario_config);
      const resmgm::Scenario s = resmgm::scenario_for(config, sweep_value, scenario_seed);
      std::cout << resmgm::scenario_to_config(s, config.cores_per_tile) << '\n';
    }
  } catch (const resmgm::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const resmgm::OracleGuardError& e) {
    std::cerr << "refusing --validate-oracle: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
