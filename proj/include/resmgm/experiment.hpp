#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "resmgm/dcop.hpp"
#include "resmgm/harness.hpp"
#include "resmgm/local_search.hpp"
#include "resmgm/workload.hpp"

namespace resmgm {

/// Bad experiment configuration; `what()` names the offending key.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SweepAxis : std::uint8_t { kNone, kTiles, kAgents };

std::string_view to_string(SweepAxis axis);
SweepAxis parse_sweep_axis(std::string_view text);

struct NamedConfig {
  std::string name;
  HeuristicConfig config;
};

/// Presets "full", "no_kdtree" (full without partition pruning) and
/// "plain_mgm". Throws ConfigError on an unknown name.
HeuristicConfig preset_config(std::string_view name);

struct ExperimentConfig {
  int tiles = 3;
  int cores_per_tile = 4;
  std::vector<ResourceType> type_pattern{ResourceType::kRegular};

  WorkloadParams workload;
  /// Unset: derived from the pre-allocated count (see scenario_for).
  std::optional<int> num_apriori;

  /// Explicit scenario; replaces generation and requires SweepAxis::kNone.
  std::optional<Scenario> scenario;

  SweepAxis axis = SweepAxis::kNone;
  int sweep_from = 0;
  int sweep_to = 0;

  std::uint64_t seed_base = 0;
  int seed_count = 1;

  std::vector<NamedConfig> configs{{"full", HeuristicConfig::full()}};
  Schedule schedule = Schedule::kDeterministic;
  bool validate_oracle = false;
  /// "-" is standard output.
  std::string csv_path = "-";
  std::optional<std::string> trace_path;
  /// Sweep points evaluated concurrently.
  int jobs = 1;

  std::vector<int> sweep_values() const;
  /// Throws ConfigError.
  void validate() const;
};

/// Parses the JSON config document described in the README.
ExperimentConfig parse_experiment_config(std::string_view text);
ExperimentConfig load_experiment_config(const std::string& path);

/// Topology of one sweep point.
Topology topology_for(const ExperimentConfig& config, int sweep_value);

/// Scenario of one sweep point and seed.
///
/// Tile sweep: `sweep_value` tiles on a near-square grid at the configured
/// load. Agent sweep: `sweep_value` agents in total, sweep_value - 1 of them
/// a priori, at load (sweep_value - 1) / (sweep_to - 1). Without an explicit
/// a priori count the generator uses round(2 * total / (1 + cap)) agents,
/// clamped to what the load allows.
Scenario scenario_for(const ExperimentConfig& config, int sweep_value, std::uint64_t seed);

/// Serialises `scenario` as an explicit-scenario config document.
std::string scenario_to_config(const Scenario& scenario, int cores_per_tile);

struct ExperimentRow {
  SweepAxis axis = SweepAxis::kNone;
  int sweep_value = 0;
  std::uint64_t seed = 0;
  std::string config_name;
  Metrics metrics;
  std::optional<Cost> oracle_cost;
};

/// Header line, without newline.
std::string csv_header(bool with_oracle);
std::string csv_row(const ExperimentRow& row, bool with_oracle);

/// final - oracle; 0 when both are infinite, "inf" when only final is.
std::string optimality_gap(Cost final_cost, Cost oracle_cost);

/// Runs every sweep point x seed x config and writes one CSV row each, in
/// that order, after an optional header. Throws OracleGuardError before running
/// anything if validate_oracle is set and some instance is too large.
void run_experiment(const ExperimentConfig& config, std::ostream& csv,
                    std::ostream* trace = nullptr, bool write_header = true);

}  // namespace resmgm
