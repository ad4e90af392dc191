#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "resmgm/experiment.hpp"
#include "resmgm/harness.hpp"
#include "resmgm/oracle.hpp"
#include "resmgm/partition.hpp"
#include "resmgm/workload.hpp"
#include "support.hpp"

using namespace resmgm;
namespace rt = resmgm::testing;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

bool non_increasing(const std::vector<Cost>& costs) {
  for (std::size_t i = 1; i < costs.size(); ++i)
    if (costs[i - 1] < costs[i]) return false;
  return true;
}

/// Every run made by this binary, for the suite-wide monotonicity and
/// consistency checks.
struct RunLog {
  std::size_t runs = 0;
  std::size_t increasing = 0;
  std::size_t checked_starts = 0;
  std::size_t rounds_checked = 0;
  std::size_t inconsistent = 0;
};
RunLog run_log;

RunResult run(const Scenario& s, const HeuristicConfig& config, std::uint64_t seed = 0,
              Schedule schedule = Schedule::kDeterministic) {
  RunOptions o;
  o.config = config;
  o.seed = seed;
  o.schedule = schedule;
  o.check_invariants = false;
  RunResult r = run_to_termination(s, o);
  ++run_log.runs;
  if (!non_increasing(r.metrics.per_round_cost)) ++run_log.increasing;
  const bool clean_start = !r.history.empty() && r.history.front().consistent &&
                           rt::disjoint(r.history.front().committed);
  if (clean_start) {
    ++run_log.checked_starts;
    for (const RoundRecord& rec : r.history) {
      ++run_log.rounds_checked;
      if (!rec.consistent || !rt::disjoint(rec.committed)) ++run_log.inconsistent;
    }
  }
  return r;
}

bool any_movable(const Scenario& s) {
  return std::any_of(s.apriori.begin(), s.apriori.end(),
                     [](const AgentSpec& a) { return a.policy.movable; });
}

LocalView allocation_of(const Scenario& s) {
  LocalView view(s.topology.resource_count());
  for (const AgentSpec& a : s.apriori)
    for (ResourceId r : a.initial) view[r] = Cell::owner(a.id);
  return view;
}

double mean(const std::vector<double>& xs) {
  double sum = 0;
  for (double x : xs) sum += x;
  return xs.empty() ? 0.0 : sum / static_cast<double>(xs.size());
}

double median(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 ? xs[n / 2] : (xs[n / 2 - 1] + xs[n / 2]) / 2.0;
}

std::string config_path(const std::string& name) {
  return std::string(RESMGM_SOURCE_DIR) + "/configs/" + name;
}

Verdict oracle_optimality() {
  const int instances = 240;
  int equal = 0;
  int zero_cases = 0;
  int zero_hits = 0;
  for (int seed = 0; seed < instances; ++seed) {
    const Scenario s = rt::small_instance(static_cast<std::uint64_t>(seed));
    const auto seed64 = static_cast<std::uint64_t>(seed);
    const Cost reached = run(s, HeuristicConfig::full(), seed64).metrics.final_cost;
    if (reached == brute_force_optimal(s, any_movable(s)).cost) ++equal;
    if (brute_force_optimal(s, false).cost == Cost::zero()) {
      ++zero_cases;
      if (reached == Cost::zero()) ++zero_hits;
    }
  }
  const double share = static_cast<double>(equal) / instances;
  return {share >= 0.95 && zero_hits == zero_cases,
          fmt("%d/%d runs reach the oracle optimum (%.1f%%, need 95%%); "
              "zero optimum reached in %d/%d",
              equal, instances, 100.0 * share, zero_hits, zero_cases)};
}

Verdict early_termination_equivalence() {
  int same = 0;
  int fewer_or_equal = 0;
  long saved = 0;
  const auto& suite = rt::standard_suite();
  for (std::size_t i = 0; i < suite.size(); ++i) {
    HeuristicConfig on = HeuristicConfig::full();
    on.max_distance = 48;
    HeuristicConfig off = on;
    off.early_termination = false;
    const RunResult a = run(suite[i], on, i);
    const RunResult b = run(suite[i], off, i);
    if (a.assignment == b.assignment) ++same;
    if (a.metrics.rounds <= b.metrics.rounds) ++fewer_or_equal;
    saved += static_cast<long>(b.metrics.rounds) - static_cast<long>(a.metrics.rounds);
  }
  const int n = static_cast<int>(suite.size());
  return {same == n && fewer_or_equal == n,
          fmt("equal assignments %d/%d, rounds(on) <= rounds(off) %d/%d, %ld rounds saved", same, n,
              fewer_or_equal, n, saved)};
}

Verdict multi_variable_speedup() {
  std::vector<double> on_rounds;
  std::vector<double> off_rounds;
  int consistent = 0;
  const auto& suite = rt::standard_suite();
  for (std::size_t i = 0; i < suite.size(); ++i) {
    HeuristicConfig on = HeuristicConfig::full();
    HeuristicConfig off = on;
    off.multi_variable_change = false;
    const RunResult a = run(suite[i], on, i);
    const RunResult b = run(suite[i], off, i);
    on_rounds.push_back(a.metrics.rounds);
    off_rounds.push_back(b.metrics.rounds);
    if (rt::disjoint(a.assignment) && rt::disjoint(b.assignment)) ++consistent;
  }
  const int n = static_cast<int>(suite.size());
  return {mean(on_rounds) <= mean(off_rounds) && consistent == n,
          fmt("mean rounds %.3f with, %.3f without; consistent %d/%d", mean(on_rounds),
              mean(off_rounds), consistent, n)};
}

Verdict pruning_soundness() {
  int missed = 0;
  int queries = 0;
  int close = 0;
  const auto& suite = rt::standard_suite();
  for (std::size_t i = 0; i < suite.size(); ++i) {
    const Scenario& s = suite[i];
    const PartitionTree tree =
        build_tree(s.topology, allocation_of(s), default_partition_depth(s.topology));
    const AgentId me = s.new_agents[0].id;
    for (ResourceType type :
         {ResourceType::kRegular, ResourceType::kReconfig, ResourceType::kStream}) {
      const auto picked = select_participants(tree, s.topology, pe_type(type), me);
      for (const AgentSpec& a : s.apriori)
        for (ResourceId r : a.initial)
          if (s.topology.type_of(r) == type && !picked.contains(a.id)) ++missed;
      ++queries;
    }
    const auto picked = select_participants(tree, s.topology, s.new_agents[0].constraint, me);
    for (const AgentSpec& a : s.apriori)
      if (!a.initial.empty() && !picked.contains(a.id)) ++missed;
    ++queries;

    HeuristicConfig pruned = HeuristicConfig::full();
    HeuristicConfig flat = pruned;
    flat.partition_pruning = false;
    const Cost a = run(s, pruned, i).metrics.final_cost;
    const Cost b = run(s, flat, i).metrics.final_cost;
    if (a.is_infinite() || b.is_infinite() || a == Cost::zero() || b == Cost::zero()) {
      if (a == b) ++close;
    } else if (std::fabs(a.value() - b.value()) <= 0.10 * b.value()) {
      ++close;
    }
  }
  const int n = static_cast<int>(suite.size());
  const double share = static_cast<double>(close) / n;
  return {missed == 0 && share >= 0.90,
          fmt("%d false exclusions over %d queries; "
              "pruned cost within 10%% on %d/%d (%.1f%%, need 90%%)",
              missed, queries, close, n, 100.0 * share)};
}

/// Least-squares slope of ys over 1..n.
double slope(const std::vector<double>& ys) {
  const double n = static_cast<double>(ys.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < ys.size(); ++i) {
    const double x = static_cast<double>(i + 1);
    sx += x;
    sy += ys[i];
    sxx += x * x;
    sxy += x * ys[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

Verdict tile_sweep_trend() {
  const ExperimentConfig config = load_experiment_config(config_path("tile_sweep.json"));
  const std::size_t points = config.sweep_values().size();
  std::vector<std::vector<double>> messages(config.configs.size(), std::vector<double>(points));
  std::vector<std::vector<double>> bytes = messages;
  std::uint64_t over_bound = 0;
  std::uint64_t counted = 0;
  for (std::size_t p = 0; p < points; ++p) {
    const int tiles = config.sweep_values()[p];
    for (int k = 0; k < config.seed_count; ++k) {
      const std::uint64_t seed = config.seed_base + static_cast<std::uint64_t>(k);
      const Scenario s = scenario_for(config, tiles, seed);
      for (std::size_t c = 0; c < config.configs.size(); ++c) {
        const RunResult r = run(s, config.configs[c].config, seed);
        for (const auto& round : r.metrics.sends)
          for (const auto& [agent, sent] : round) {
            ++counted;
            if (sent > 2 * r.metrics.neighbor_counts.at(agent)) ++over_bound;
          }
        messages[c][p] += static_cast<double>(r.metrics.messages_total) / config.seed_count;
        bytes[c][p] += static_cast<double>(r.metrics.message_bytes_total) / config.seed_count;
      }
    }
  }
  bool grows = true;
  std::string detail;
  for (std::size_t c = 0; c < config.configs.size(); ++c) {
    int dips = 0;
    for (std::size_t p = 1; p < points; ++p)
      if (messages[c][p] < messages[c][p - 1] || bytes[c][p] < bytes[c][p - 1]) ++dips;
    grows = grows && slope(messages[c]) > 0 && slope(bytes[c]) > 0 &&
            messages[c].back() > messages[c].front() && bytes[c].back() > bytes[c].front();
    detail += fmt("%s messages %.0f->%.0f bytes %.0f->%.0f (%d dips); ",
                  config.configs[c].name.c_str(), messages[c].front(), messages[c].back(),
                  bytes[c].front(), bytes[c].back(), dips);
  }
  return {grows && over_bound == 0,
          detail + fmt("%llu of %llu agent-rounds above 2x neighbours",
                       static_cast<unsigned long long>(over_bound),
                       static_cast<unsigned long long>(counted))};
}

Verdict load_sweep_trend() {
  ExperimentConfig config = load_experiment_config(config_path("agent_sweep.json"));
  config.workload.apriori_policy.movable = false;
  const Topology topology = topology_for(config, 10);
  const int seeds = 20;
  std::vector<double> full_load;
  std::vector<double> half_load;
  int bounded = 0;
  int infinite = 0;
  for (int seed = 0; seed < seeds; ++seed) {
    const Scenario full = scenario_for(config, config.sweep_to, static_cast<std::uint64_t>(seed));
    const HeuristicConfig heuristics = HeuristicConfig::full();
    const RunResult r = run(full, heuristics, static_cast<std::uint64_t>(seed));
    if (r.metrics.rounds <= plan_run(full, heuristics).max_distance) ++bounded;
    if (r.metrics.final_cost.is_infinite()) ++infinite;
    full_load.push_back(static_cast<double>(r.metrics.constraint_evaluations));

    WorkloadParams half = config.workload;
    half.apriori_load = 0.5;
    half.num_apriori = 4;
    const Scenario h = generate_scenario(topology, half, static_cast<std::uint64_t>(seed));
    const RunResult hr = run(h, heuristics, static_cast<std::uint64_t>(seed));
    half_load.push_back(static_cast<double>(hr.metrics.constraint_evaluations));
  }
  const double ratio = median(full_load) / median(half_load);
  return {bounded == seeds && infinite == seeds && ratio >= 2.0,
          fmt("terminated within max_distance %d/%d, infinite cost %d/%d; median evaluations "
              "%.0f at 100%% vs %.0f at 50%% load, ratio %.2f (need >= 2)",
              bounded, seeds, infinite, seeds, median(full_load), median(half_load), ratio)};
}

Verdict downey_model() {
  int failures = 0;
  for (double sigma : {0.1, 0.5, 1.0, 1.7, 3.0})
    for (int a = 1; a <= 12; ++a) {
      if (downey_speedup(sigma, a, 1) != 1.0) ++failures;
      double prev = 0.0;
      for (int n = 0; n <= 4 * a; ++n) {
        const double s = downey_speedup(sigma, a, n);
        if (s < prev || s > a) ++failures;
        prev = s;
      }
    }
  int discontinuities = 0;
  std::mt19937_64 rng(17);
  for (int i = 0; i < 200; ++i) {
    const long double sigma = std::uniform_real_distribution<double>(0.05, 4.0)(rng);
    const long double a = std::uniform_int_distribution<int>(1, 16)(rng);
    auto relative = [](long double x, long double y) { return std::fabs(x - y) / std::fabs(y); };
    if (sigma <= 1) {
      const long double low = a * a / (a + sigma * (a - 1) / 2);
      const long double high = a * a / (sigma * (a - 0.5L) + a * (1 - sigma / 2));
      const long double sat = 2 * a - 1;
      const long double top = a * sat / (sigma * (a - 0.5L) + sat * (1 - sigma / 2));
      if (relative(low, high) > 1e-9 || relative(top, a) > 1e-9) ++discontinuities;
    } else {
      const long double edge = a + a * sigma - sigma;
      const long double top = edge * a * (sigma + 1) / (sigma * (edge + a - 1) + a);
      if (relative(top, a) > 1e-9) ++discontinuities;
    }
  }
  int mismatches = 0;
  const Topology t = rt::regular_grid(1, 1, 64);
  for (int i = 0; i < 1000; ++i) {
    const double sigma = std::uniform_real_distribution<double>(0.05, 4.0)(rng);
    const int a = std::uniform_int_distribution<int>(1, 16)(rng);
    const int n = std::uniform_int_distribution<int>(1, 4 * a)(rng);
    ResourceSet held;
    for (int r = 0; r < n; ++r) held.insert(static_cast<ResourceId>(r));
    const Cost cost = eval_constraint(downey(sigma, a), view_from_claims(64, 1, held), 1, t);
    const long double expected = 1.0L / rt::reference_speedup(sigma, a, n);
    if (cost.is_infinite() || std::fabs(cost.value() - expected) > 1e-12 * expected) ++mismatches;
  }
  return {failures == 0 && discontinuities == 0 && mismatches == 0,
          fmt("%d shape violations, %d breakpoint gaps, %d of 1000 costs off the reference",
              failures, discontinuities, mismatches)};
}

std::vector<std::string> without_wall_time(const std::string& csv) {
  std::vector<std::string> rows;
  std::istringstream in(csv);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream fields(line);
    std::string cell;
    while (std::getline(fields, cell, ',')) cells.push_back(cell);
    if (cells.size() >= 2) cells.erase(cells.end() - 2);
    std::string joined;
    for (const auto& c : cells) joined += c + ',';
    rows.push_back(joined);
  }
  return rows;
}

Verdict determinism() {
  std::size_t rows = 0;
  bool same = true;
  for (const char* name : {"tile_sweep.json", "agent_sweep.json", "oracle_check.json"}) {
    const ExperimentConfig config = load_experiment_config(config_path(name));
    std::ostringstream first;
    std::ostringstream second;
    run_experiment(config, first);
    run_experiment(config, second);
    const auto a = without_wall_time(first.str());
    same = same && a == without_wall_time(second.str());
    rows += a.size() - 1;
  }
  return {same, fmt("%zu CSV rows over three sweeps %s", rows, same ? "identical" : "differ")};
}

Verdict oracle_self_test() {
  Scenario two{rt::regular_grid(1, 1, 2), {}, {}};
  two.new_agents.push_back({1, all_of(pe_quantity(1, 1), pe_type(ResourceType::kRegular)), {}, {}});
  const OracleResult a = brute_force_optimal(two, false);

  Scenario no_stream{rt::regular_grid(2, 1, 2), {}, {}};
  no_stream.new_agents.push_back(
      {1, all_of(pe_quantity(1, 1), pe_type(ResourceType::kStream)), {}, {}});
  const OracleResult b = brute_force_optimal(no_stream, false);

  Scenario full{rt::regular_grid(1, 1, 2), {}, {}};
  full.apriori.push_back({1, pe_quantity(2, 2), {false, 1.0}, {0, 1}});
  full.new_agents.push_back({2, pe_quantity(1, 1), {}, {}});
  const OracleResult c = brute_force_optimal(full, false);

  const bool pass = a.cost == Cost::zero() && a.optimum_count == 2 && b.cost.is_infinite() &&
                    c.cost.is_infinite();
  return {pass, fmt("costs %s / %s / %s, optima %llu", a.cost.to_string().c_str(),
                    b.cost.to_string().c_str(), c.cost.to_string().c_str(),
                    static_cast<unsigned long long>(a.optimum_count))};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));
  const bool all = wanted.empty() || wanted.contains(2) || wanted.contains(3);

  const std::vector<std::pair<int, std::function<Verdict()>>> checks{
      {1, oracle_optimality},     {4, early_termination_equivalence},
      {5, multi_variable_speedup}, {6, pruning_soundness},
      {7, tile_sweep_trend},      {8, load_sweep_trend},
      {9, downey_model},          {10, determinism},
      {11, oracle_self_test}};
  const char* names[] = {"",
                         "oracle optimality",
                         "monotonicity",
                         "consistency",
                         "early termination",
                         "multi-variable change",
                         "partition pruning",
                         "tile sweep",
                         "load sweep",
                         "downey model",
                         "determinism",
                         "oracle self-test"};

  std::vector<std::pair<int, Verdict>> results;
  for (const auto& [id, check] : checks)
    if (all || wanted.contains(id)) results.emplace_back(id, check());
  if (all) {
    results.emplace_back(2, Verdict{run_log.increasing == 0,
                                    fmt("%zu of %zu runs with a cost increase", run_log.increasing,
                                        run_log.runs)});
    results.emplace_back(3, Verdict{run_log.inconsistent == 0,
                                    fmt("%zu double allocations over %zu round boundaries of %zu runs",
                                        run_log.inconsistent, run_log.rounds_checked,
                                        run_log.checked_starts)});
  }
  std::sort(results.begin(), results.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });

  int failed = 0;
  for (const auto& [id, v] : results) {
    if (!wanted.empty() && !wanted.contains(id)) continue;
    std::printf("criterion %2d %-22s %s  %s\n", id, names[id], v.pass ? "PASS" : "FAIL",
                v.detail.c_str());
    if (!v.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
