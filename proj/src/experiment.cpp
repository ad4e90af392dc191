#include "resmgm/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <nlohmann/json.hpp>
#include <sstream>
#include <thread>

#include "resmgm/oracle.hpp"

namespace resmgm {

using nlohmann::json;

std::string_view to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::kNone: return "none";
    case SweepAxis::kTiles: return "tiles";
    case SweepAxis::kAgents: return "agents";
  }
  return "?";
}

SweepAxis parse_sweep_axis(std::string_view text) {
  if (text == "none") return SweepAxis::kNone;
  if (text == "tiles") return SweepAxis::kTiles;
  if (text == "agents") return SweepAxis::kAgents;
  throw ConfigError("sweep.axis must be none, tiles or agents, got '" + std::string(text) + "'");
}

HeuristicConfig preset_config(std::string_view name) {
  if (name == "full") return HeuristicConfig::full();
  if (name == "no_kdtree") {
    HeuristicConfig c = HeuristicConfig::full();
    c.partition_pruning = false;
    return c;
  }
  if (name == "plain_mgm") return HeuristicConfig::plain_mgm();
  throw ConfigError("unknown heuristic preset '" + std::string(name) + "'");
}

std::vector<int> ExperimentConfig::sweep_values() const {
  if (axis == SweepAxis::kNone) return {0};
  std::vector<int> out;
  for (int v = sweep_from; v <= sweep_to; ++v) out.push_back(v);
  return out;
}

void ExperimentConfig::validate() const {
  if (tiles < 1) throw ConfigError("topology.tiles must be positive");
  if (cores_per_tile < 1) throw ConfigError("topology.cores_per_tile must be positive");
  if (type_pattern.empty()) throw ConfigError("topology.types must not be empty");
  if (seed_count < 1) throw ConfigError("seeds.count must be positive");
  if (jobs < 1) throw ConfigError("jobs must be positive");
  if (configs.empty()) throw ConfigError("configs must not be empty");
  for (const auto& c : configs) {
    if (c.name.empty() || c.name.find_first_of(",\"\n\r") != std::string::npos)
      throw ConfigError("config name '" + c.name + "' is empty or not CSV-safe");
    try {
      c.config.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError("config '" + c.name + "': " + e.what());
    }
  }
  for (std::size_t i = 0; i < configs.size(); ++i)
    for (std::size_t j = i + 1; j < configs.size(); ++j)
      if (configs[i].name == configs[j].name)
        throw ConfigError("duplicate config name '" + configs[i].name + "'");
  if (axis != SweepAxis::kNone && (sweep_from < 1 || sweep_from > sweep_to))
    throw ConfigError("sweep range must satisfy 1 <= from <= to");
  if (axis == SweepAxis::kAgents && num_apriori)
    throw ConfigError("workload.num_apriori is set by the agent sweep");
  if (scenario && axis != SweepAxis::kNone)
    throw ConfigError("an explicit scenario cannot be swept");
  if (num_apriori && *num_apriori < 0) throw ConfigError("workload.num_apriori must be >= 0");
  try {
    workload.new_agent.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("workload.new_agent: ") + e.what());
  }
  if (scenario) {
    try {
      scenario->validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("scenario: ") + e.what());
    }
  }
}

namespace {

void check_keys(const json& object, std::string_view where,
                std::initializer_list<std::string_view> allowed) {
  if (!object.is_object()) throw ConfigError(std::string(where) + " must be an object");
  for (const auto& [key, value] : object.items())
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ConfigError("unknown key '" + std::string(where) + "." + key + "'");
}

template <typename T>
T get(const json& object, const char* key, std::string_view where) {
  try {
    return object.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string(where) + "." + key + " has the wrong type");
  }
}

template <typename T>
void read(const json& object, const char* key, std::string_view where, T& out) {
  if (object.contains(key)) out = get<T>(object, key, where);
}

void read_range(const json& object, const char* key, std::string_view where, int& low,
                int& high) {
  if (!object.contains(key)) return;
  const auto v = get<std::vector<int>>(object, key, where);
  if (v.size() != 2) throw ConfigError(std::string(where) + "." + key + " must be [low, high]");
  low = v[0];
  high = v[1];
}

void read_range(const json& object, const char* key, std::string_view where, double& low,
                double& high) {
  if (!object.contains(key)) return;
  const auto v = get<std::vector<double>>(object, key, where);
  if (v.size() != 2) throw ConfigError(std::string(where) + "." + key + " must be [low, high]");
  low = v[0];
  high = v[1];
}

MigrationPolicy read_policy(const json& object, std::string_view where) {
  MigrationPolicy p;
  read(object, "movable", where, p.movable);
  read(object, "migration_cost", where, p.per_resource_cost);
  if (!(p.per_resource_cost >= 0.0))
    throw ConfigError(std::string(where) + ".migration_cost must be >= 0");
  return p;
}

HeuristicConfig read_heuristics(const json& object, std::string_view where) {
  check_keys(object, where,
             {"name", "preset", "smart_init", "early_termination", "early_term_threshold",
              "local_search_zero_cutoff", "loss_aware_targeting", "tile_iteration",
              "thinking_globally", "multi_variable_change", "field_of_view_radius",
              "max_distance", "partition_pruning", "partition_depth"});
  HeuristicConfig c = preset_config(object.value("preset", std::string("full")));
  read(object, "smart_init", where, c.smart_init);
  read(object, "early_termination", where, c.early_termination);
  read(object, "early_term_threshold", where, c.early_term_threshold);
  read(object, "local_search_zero_cutoff", where, c.local_search_zero_cutoff);
  read(object, "loss_aware_targeting", where, c.loss_aware_targeting);
  read(object, "tile_iteration", where, c.tile_iteration);
  read(object, "thinking_globally", where, c.thinking_globally);
  read(object, "multi_variable_change", where, c.multi_variable_change);
  read(object, "max_distance", where, c.max_distance);
  read(object, "partition_pruning", where, c.partition_pruning);
  read(object, "partition_depth", where, c.partition_depth);
  if (object.contains("field_of_view_radius")) {
    if (object.at("field_of_view_radius").is_null())
      c.field_of_view_radius.reset();
    else
      c.field_of_view_radius = get<int>(object, "field_of_view_radius", where);
  }
  return c;
}

std::vector<ResourceType> read_types(const json& object, std::string_view where) {
  std::vector<ResourceType> out;
  for (const auto& name : get<std::vector<std::string>>(object, "types", where)) {
    try {
      out.push_back(parse_resource_type(name));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string(where) + ".types: " + e.what());
    }
  }
  return out;
}

AgentSpec read_agent(const json& object, std::string_view where, bool is_new) {
  if (is_new)
    check_keys(object, where, {"id", "constraint", "movable", "migration_cost"});
  else
    check_keys(object, where, {"id", "constraint", "initial", "movable", "migration_cost"});
  AgentSpec spec;
  const int id = get<int>(object, "id", where);
  if (id < 0 || id > static_cast<int>(kMaxAgentId))
    throw ConfigError(std::string(where) + ".id out of range");
  spec.id = static_cast<AgentId>(id);
  try {
    spec.constraint = parse_constraint(get<std::string>(object, "constraint", where));
  } catch (const std::exception& e) {
    throw ConfigError(std::string(where) + ".constraint: " + e.what());
  }
  spec.policy = read_policy(object, where);
  if (!is_new)
    for (int r : get<std::vector<int>>(object, "initial", where)) {
      if (r < 0) throw ConfigError(std::string(where) + ".initial has a negative resource");
      spec.initial.insert(static_cast<ResourceId>(r));
    }
  return spec;
}

}  // namespace

ExperimentConfig parse_experiment_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(doc, "config",
             {"topology", "workload", "scenario", "sweep", "seeds", "configs", "schedule",
              "validate_oracle", "output", "jobs"});
  ExperimentConfig cfg;

  if (doc.contains("topology")) {
    const json& t = doc.at("topology");
    check_keys(t, "topology", {"tiles", "cores_per_tile", "types"});
    read(t, "tiles", "topology", cfg.tiles);
    read(t, "cores_per_tile", "topology", cfg.cores_per_tile);
    if (t.contains("types")) cfg.type_pattern = read_types(t, "topology");
  }

  if (doc.contains("workload")) {
    const json& w = doc.at("workload");
    check_keys(w, "workload",
               {"apriori_load", "num_apriori", "max_res_per_agent", "apriori_movable",
                "migration_cost", "new_agent"});
    read(w, "apriori_load", "workload", cfg.workload.apriori_load);
    if (w.contains("num_apriori")) cfg.num_apriori = get<int>(w, "num_apriori", "workload");
    read(w, "max_res_per_agent", "workload", cfg.workload.max_res_per_agent);
    read(w, "apriori_movable", "workload", cfg.workload.apriori_policy.movable);
    read(w, "migration_cost", "workload", cfg.workload.apriori_policy.per_resource_cost);
    if (w.contains("new_agent")) {
      const json& n = w.at("new_agent");
      constexpr std::string_view where = "workload.new_agent";
      check_keys(n, where, {"min_pes", "max_pes", "parallelism", "sigma", "tile_sharing_prob"});
      ConstraintParams& p = cfg.workload.new_agent;
      read_range(n, "min_pes", where, p.min_pes_low, p.min_pes_high);
      read_range(n, "max_pes", where, p.max_pes_low, p.max_pes_high);
      read_range(n, "parallelism", where, p.parallelism_low, p.parallelism_high);
      read_range(n, "sigma", where, p.sigma_low, p.sigma_high);
      read(n, "tile_sharing_prob", where, p.tile_sharing_prob);
    }
  }

  if (doc.contains("sweep")) {
    const json& s = doc.at("sweep");
    check_keys(s, "sweep", {"axis", "from", "to"});
    cfg.axis = parse_sweep_axis(get<std::string>(s, "axis", "sweep"));
    if (cfg.axis != SweepAxis::kNone) {
      cfg.sweep_from = get<int>(s, "from", "sweep");
      cfg.sweep_to = get<int>(s, "to", "sweep");
    }
  }

  if (doc.contains("seeds")) {
    const json& s = doc.at("seeds");
    check_keys(s, "seeds", {"base", "count"});
    read(s, "base", "seeds", cfg.seed_base);
    read(s, "count", "seeds", cfg.seed_count);
  }

  if (doc.contains("configs")) {
    const json& list = doc.at("configs");
    if (!list.is_array()) throw ConfigError("configs must be an array");
    cfg.configs.clear();
    for (const json& item : list) {
      if (item.is_string()) {
        const auto name = item.get<std::string>();
        cfg.configs.push_back({name, preset_config(name)});
      } else {
        const auto name = get<std::string>(item, "name", "configs[]");
        cfg.configs.push_back({name, read_heuristics(item, "configs." + name)});
      }
    }
  }

  if (doc.contains("schedule")) {
    try {
      cfg.schedule = parse_schedule(get<std::string>(doc, "schedule", "config"));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  read(doc, "validate_oracle", "config", cfg.validate_oracle);
  read(doc, "jobs", "config", cfg.jobs);

  if (doc.contains("output")) {
    const json& o = doc.at("output");
    check_keys(o, "output", {"csv", "trace"});
    read(o, "csv", "output", cfg.csv_path);
    if (o.contains("trace")) cfg.trace_path = get<std::string>(o, "trace", "output");
  }

  if (doc.contains("scenario")) {
    const json& s = doc.at("scenario");
    check_keys(s, "scenario", {"apriori", "new_agents"});
    Scenario scenario{topology_for(cfg, 0), {}, {}};
    if (s.contains("apriori"))
      for (const json& a : s.at("apriori"))
        scenario.apriori.push_back(read_agent(a, "scenario.apriori[]", false));
    if (s.contains("new_agents"))
      for (const json& a : s.at("new_agents"))
        scenario.new_agents.push_back(read_agent(a, "scenario.new_agents[]", true));
    cfg.scenario = std::move(scenario);
  }

  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_experiment_config(buf.str());
}

Topology topology_for(const ExperimentConfig& config, int sweep_value) {
  const int tiles = config.axis == SweepAxis::kTiles ? sweep_value : config.tiles;
  const auto [x, y] = grid_shape_for(tiles);
  return build_grid_topology(x, y, config.cores_per_tile, config.type_pattern);
}

Scenario scenario_for(const ExperimentConfig& config, int sweep_value, std::uint64_t seed) {
  if (config.scenario) return *config.scenario;
  const Topology topology = topology_for(config, sweep_value);
  WorkloadParams params = config.workload;
  if (config.axis == SweepAxis::kAgents) {
    params.num_apriori = sweep_value - 1;
    params.apriori_load = config.sweep_to > 1 ? static_cast<double>(sweep_value - 1) /
                                                    static_cast<double>(config.sweep_to - 1)
                                              : 0.0;
  } else if (config.num_apriori) {
    params.num_apriori = *config.num_apriori;
  } else {
    const auto total =
        static_cast<long>(preallocated_count(params.apriori_load, topology.resource_count()));
    const long cap = params.max_res_per_agent;
    const long fewest = (total + cap - 1) / cap;
    const long typical = std::lround(2.0 * static_cast<double>(total) /
                                     static_cast<double>(1 + cap));
    params.num_apriori = static_cast<int>(std::clamp(typical, fewest, total));
  }
  return generate_scenario(topology, params, seed);
}

std::string scenario_to_config(const Scenario& scenario, int cores_per_tile) {
  json doc;
  std::vector<std::string> types;
  for (std::size_t t = 0; t < scenario.topology.tile_count(); ++t) {
    const auto& res = scenario.topology.resources_of_tile(static_cast<TileId>(t));
    types.emplace_back(res.empty() ? "regular" : to_string(scenario.topology.type_of(res[0])));
  }
  doc["topology"] = {{"tiles", scenario.topology.tile_count()},
                     {"cores_per_tile", cores_per_tile},
                     {"types", types}};
  auto agent = [](const AgentSpec& a, bool with_initial) {
    json j = {{"id", a.id},
              {"constraint", serialize_constraint(a.constraint)},
              {"movable", a.policy.movable},
              {"migration_cost", a.policy.per_resource_cost}};
    if (with_initial) j["initial"] = std::vector<ResourceId>(a.initial.begin(), a.initial.end());
    return j;
  };
  json apriori = json::array();
  for (const auto& a : scenario.apriori) apriori.push_back(agent(a, true));
  json fresh = json::array();
  for (const auto& a : scenario.new_agents) fresh.push_back(agent(a, false));
  doc["scenario"] = {{"apriori", apriori}, {"new_agents", fresh}};
  return doc.dump(2);
}

std::string csv_header(bool with_oracle) {
  std::string out =
      "sweep_axis,sweep_value,seed,config_name,rounds,messages_total,message_bytes_total,"
      "constraint_evaluations,final_cost,";
  if (with_oracle) out += "oracle_cost,optimality_gap,";
  out += "wall_time_us,peak_agent_state_bytes";
  return out;
}

std::string optimality_gap(Cost final_cost, Cost oracle_cost) {
  if (final_cost.is_infinite()) return oracle_cost.is_infinite() ? "0" : "inf";
  if (oracle_cost.is_infinite()) return "-inf";
  return Cost(final_cost.value() - oracle_cost.value()).to_string();
}

std::string csv_row(const ExperimentRow& row, bool with_oracle) {
  std::ostringstream out;
  const Metrics& m = row.metrics;
  out << to_string(row.axis) << ',' << row.sweep_value << ',' << row.seed << ','
      << row.config_name << ',' << m.rounds << ',' << m.messages_total << ','
      << m.message_bytes_total << ',' << m.constraint_evaluations << ','
      << m.final_cost.to_string() << ',';
  if (with_oracle) {
    if (row.oracle_cost)
      out << row.oracle_cost->to_string() << ','
          << optimality_gap(m.final_cost, *row.oracle_cost) << ',';
    else
      out << ",,";
  }
  out << m.wall_time.count() << ',' << m.peak_agent_state_bytes;
  return out.str();
}

namespace {

struct Unit {
  int sweep_value = 0;
  std::uint64_t seed = 0;
  Scenario scenario;
};

bool any_movable_apriori(const Scenario& scenario) {
  return std::any_of(scenario.apriori.begin(), scenario.apriori.end(),
                     [](const AgentSpec& a) { return a.policy.movable; });
}

/// CSV rows and trace lines of one sweep point and seed.
std::pair<std::string, std::string> run_unit(const ExperimentConfig& config, const Unit& unit,
                                             bool tracing) {
  std::optional<Cost> oracle;
  if (config.validate_oracle)
    oracle = brute_force_optimal(unit.scenario, any_movable_apriori(unit.scenario)).cost;
  std::ostringstream rows;
  std::ostringstream trace;
  for (const auto& named : config.configs) {
    RunOptions options;
    options.config = named.config;
    options.schedule = config.schedule;
    options.seed = unit.seed;
    if (tracing) {
      trace << json{{"run",
                     {{"sweep_axis", to_string(config.axis)},
                      {"sweep_value", unit.sweep_value},
                      {"seed", unit.seed},
                      {"config_name", named.name}}}}
                   .dump()
            << '\n';
      options.trace = &trace;
    }
    ExperimentRow row{config.axis, unit.sweep_value, unit.seed, named.name,
                      run_to_termination(unit.scenario, options).metrics, oracle};
    rows << csv_row(row, config.validate_oracle) << '\n';
  }
  return {rows.str(), trace.str()};
}

}  // namespace

void run_experiment(const ExperimentConfig& config, std::ostream& csv, std::ostream* trace,
                    bool write_header) {
  config.validate();
  std::vector<Unit> units;
  for (int v : config.sweep_values())
    for (int i = 0; i < config.seed_count; ++i) {
      const std::uint64_t seed = config.seed_base + static_cast<std::uint64_t>(i);
      units.push_back({v, seed, scenario_for(config, v, seed)});
    }
  if (config.validate_oracle)
    for (const Unit& u : units) check_oracle_limits(u.scenario, any_movable_apriori(u.scenario));

  if (write_header) csv << csv_header(config.validate_oracle) << '\n';

  std::vector<std::optional<std::pair<std::string, std::string>>> done(units.size());
  std::size_t flushed = 0;
  std::mutex mutex;
  std::exception_ptr failure;
  std::atomic<std::size_t> next{0};

  auto flush_ready = [&] {
    while (flushed < units.size() && done[flushed]) {
      csv << done[flushed]->first;
      if (trace) *trace << done[flushed]->second;
      done[flushed].reset();
      ++flushed;
    }
    csv.flush();
  };

  auto worker = [&] {
    for (std::size_t i = next++; i < units.size(); i = next++) {
      {
        std::lock_guard lock(mutex);
        if (failure) return;
      }
      try {
        auto result = run_unit(config, units[i], trace != nullptr);
        std::lock_guard lock(mutex);
        done[i] = std::move(result);
        flush_ready();
      } catch (...) {
        std::lock_guard lock(mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };

  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(config.jobs), units.size());
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace resmgm
