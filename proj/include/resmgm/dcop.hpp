#pragma once

#include <map>
#include <span>
#include <utility>
#include <vector>

#include "resmgm/constraint.hpp"
#include "resmgm/topology.hpp"
#include "resmgm/view.hpp"

namespace resmgm {

/// One application's agent: its constraint, migration policy and the
/// resources it holds when the optimisation starts (empty for a new request).
struct AgentSpec {
  AgentId id = 0;
  ConstraintExpr constraint;
  MigrationPolicy policy;
  ResourceSet initial;
};

/// A priori agents with a consistent incumbent allocation plus the new
/// request(s) to be placed. Several new agents appear when buffered requests
/// are processed together.
struct Scenario {
  Topology topology;
  std::vector<AgentSpec> apriori;
  std::vector<AgentSpec> new_agents;

  /// Throws std::invalid_argument on duplicate ids, ids above kMaxAgentId,
  /// unknown resources, overlapping initial assignments or a new agent
  /// with a non-empty initial assignment.
  void validate() const;

  std::vector<const AgentSpec*> all_agents() const;
  const AgentSpec& agent(AgentId id) const;
  bool is_new(AgentId id) const;
  std::map<AgentId, ResourceSet> initial_assignments() const;
};

using Assignment = std::map<AgentId, ResourceSet>;
using AgentViews = std::vector<std::pair<AgentId, LocalView>>;

/// Sum of per-agent constraint costs over each agent's own view, plus the
/// migration costs from `old_assignments`, plus the system constraint.
Cost global_cost(std::span<const std::pair<AgentId, LocalView>> views,
                 const std::map<AgentId, ConstraintExpr>& constraints,
                 const Assignment& old_assignments,
                 const std::map<AgentId, MigrationPolicy>& policies,
                 const Topology& topology, EvalStats* stats = nullptr);

/// Resources whose cell in `view` is Owner(agent).
ResourceSet extract_assignment(const LocalView& view, AgentId agent);

/// Complete, accurate views: every agent sees every claim in `assignment`.
/// Resources claimed by several agents show the lowest claimant in the other
/// agents' views; each agent always sees its own claims.
AgentViews truth_views(std::size_t resources, const Assignment& assignment);

/// global_cost of `assignment` against the scenario's incumbent allocation,
/// evaluated over truth_views.
Cost allocation_cost(const Scenario& scenario, const Assignment& assignment,
                     EvalStats* stats = nullptr);

}  // namespace resmgm
