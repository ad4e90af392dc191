#pragma once

#include <chrono>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "resmgm/agent.hpp"
#include "resmgm/dcop.hpp"
#include "resmgm/local_search.hpp"

namespace resmgm {

enum class Schedule : std::uint8_t { kDeterministic, kConcurrent };

std::string_view to_string(Schedule schedule);
/// Accepts "deterministic" or "concurrent"; throws std::invalid_argument.
Schedule parse_schedule(std::string_view text);

/// Raised when a run breaks monotonicity or commits a double allocation.
class InvariantViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RoundRecord {
  std::uint32_t round = 0;
  Assignment committed;
  Cost cost;
  /// eval_system over the committed views is zero.
  bool consistent = true;
};

struct RunOptions {
  HeuristicConfig config;
  Schedule schedule = Schedule::kDeterministic;
  std::uint64_t seed = 0;
  /// Holdings used by smart initialisation; defaults to the scenario's
  /// initial assignment. Set `use_prior` to false for a first optimisation.
  std::optional<Assignment> prior;
  bool use_prior = true;
  /// One JSON object per message: round, sender, receiver, kind, bytes.
  std::ostream* trace = nullptr;
  /// Throw InvariantViolation on a cost increase, or on a double allocation
  /// when the run started without one.
  bool check_invariants = true;
  std::function<void(const RoundRecord&)> on_round;
  /// Concurrent schedule: give up waiting for a message after this long.
  std::chrono::milliseconds stall_timeout{10000};
};

struct Metrics {
  std::uint32_t rounds = 0;
  std::uint64_t messages_total = 0;
  std::uint64_t message_bytes_total = 0;
  std::uint64_t constraint_evaluations = 0;
  Cost final_cost;
  /// Entry k is the cost after round k; entry 0 is the initial state.
  std::vector<Cost> per_round_cost;
  std::chrono::microseconds wall_time{0};
  std::uint64_t peak_agent_state_bytes = 0;
  /// sends[k][a]: messages agent a sent that belong to round k.
  std::vector<std::map<AgentId, std::uint64_t>> sends;
  std::map<AgentId, std::size_t> neighbor_counts;
};

struct RunResult {
  Assignment assignment;
  Metrics metrics;
  /// Committed allocation at every round boundary, round 0 first.
  std::vector<RoundRecord> history;
};

/// Agent setups for one optimisation.
struct RunPlan {
  std::vector<AgentSetup> setups;
  /// Holdings of a priori agents left out of the negotiation.
  Assignment frozen;
  std::uint32_t max_distance = 0;
};

/// Neighbour sets, take partners, search regions and termination windows.
/// Without partition pruning (or without new agents, or on a single tile)
/// every agent takes part and all agents are neighbours.
RunPlan plan_run(const Scenario& scenario, const HeuristicConfig& config);

/// Runs RESMGM until every agent has terminated. Throws ProtocolError on a
/// deadlock or protocol violation and std::invalid_argument on a bad scenario.
RunResult run_to_termination(const Scenario& scenario, const RunOptions& options);

/// A running system: a priori agents plus buffered requests that are
/// installed together in the next optimisation.
class World {
 public:
  World(Topology topology, std::vector<AgentSpec> apriori, RunOptions options);

  /// Queues `request`; if no optimisation is running, optimises until the
  /// buffer is empty. Throws std::invalid_argument on a duplicate agent id.
  void buffer_request(AgentSpec request);

  bool in_flight() const { return in_flight_; }
  const std::vector<AgentSpec>& apriori() const { return apriori_; }
  const std::vector<AgentSpec>& buffered() const { return buffer_; }
  const std::vector<RunResult>& runs() const { return runs_; }
  /// Agents installed by each optimisation, in order.
  const std::vector<std::vector<AgentId>>& installed() const { return installed_; }

  /// Called after every round of every optimisation.
  std::function<void(World&, const RoundRecord&)> on_round;

 private:
  void drain();

  Topology topology_;
  std::vector<AgentSpec> apriori_;
  std::vector<AgentSpec> buffer_;
  RunOptions options_;
  bool in_flight_ = false;
  std::vector<RunResult> runs_;
  std::vector<std::vector<AgentId>> installed_;
};

}  // namespace resmgm
