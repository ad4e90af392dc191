#include "resmgm/dcop.hpp"

#include <set>
#include <stdexcept>
#include <string>

namespace resmgm {

void Scenario::validate() const {
  std::set<AgentId> ids;
  std::vector<int> holder(topology.resource_count(), -1);
  auto check = [&](const AgentSpec& spec, bool is_new_agent) {
    if (spec.id > kMaxAgentId)
      throw std::invalid_argument("agent id " + std::to_string(spec.id) + " exceeds " +
                                  std::to_string(kMaxAgentId));
    if (!ids.insert(spec.id).second)
      throw std::invalid_argument("duplicate agent id " + std::to_string(spec.id));
    if (is_new_agent && !spec.initial.empty())
      throw std::invalid_argument("new agent " + std::to_string(spec.id) +
                                  " must start without resources");
    for (ResourceId r : spec.initial) {
      if (r >= topology.resource_count())
        throw std::invalid_argument("agent " + std::to_string(spec.id) +
                                    " holds unknown resource " + std::to_string(r));
      if (holder[r] >= 0)
        throw std::invalid_argument("resource " + std::to_string(r) +
                                    " initially held by two agents");
      holder[r] = static_cast<int>(spec.id);
    }
  };
  for (const auto& a : apriori) check(a, false);
  for (const auto& a : new_agents) check(a, true);
}

std::vector<const AgentSpec*> Scenario::all_agents() const {
  std::vector<const AgentSpec*> out;
  for (const auto& a : apriori) out.push_back(&a);
  for (const auto& a : new_agents) out.push_back(&a);
  return out;
}

const AgentSpec& Scenario::agent(AgentId id) const {
  for (const auto* a : all_agents())
    if (a->id == id) return *a;
  throw std::invalid_argument("unknown agent " + std::to_string(id));
}

bool Scenario::is_new(AgentId id) const {
  for (const auto& a : new_agents)
    if (a.id == id) return true;
  return false;
}

std::map<AgentId, ResourceSet> Scenario::initial_assignments() const {
  std::map<AgentId, ResourceSet> out;
  for (const auto* a : all_agents()) out[a->id] = a->initial;
  return out;
}

Cost global_cost(std::span<const std::pair<AgentId, LocalView>> views,
                 const std::map<AgentId, ConstraintExpr>& constraints,
                 const Assignment& old_assignments,
                 const std::map<AgentId, MigrationPolicy>& policies,
                 const Topology& topology, EvalStats* stats) {
  Cost total = Cost::zero();
  for (const auto& [agent, view] : views) {
    total += eval_constraint(constraints.at(agent), view, agent, topology, stats);
    total += eval_migration(old_assignments.at(agent), extract_assignment(view, agent),
                            policies.at(agent));
  }
  total += eval_system(views);
  return total;
}

ResourceSet extract_assignment(const LocalView& view, AgentId agent) {
  return view.owned_by(agent);
}

AgentViews truth_views(std::size_t resources, const Assignment& assignment) {
  LocalView shared(resources);
  for (auto it = assignment.rbegin(); it != assignment.rend(); ++it)
    for (ResourceId r : it->second) shared[r] = Cell::owner(it->first);

  AgentViews out;
  out.reserve(assignment.size());
  for (const auto& [agent, claims] : assignment) {
    LocalView view = shared;
    for (ResourceId r = 0; r < resources; ++r)
      if (view[r].owned_by(agent) && !claims.contains(r)) view[r] = Cell::free();
    for (ResourceId r : claims) view[r] = Cell::owner(agent);
    out.emplace_back(agent, std::move(view));
  }
  return out;
}

Cost allocation_cost(const Scenario& scenario, const Assignment& assignment,
                     EvalStats* stats) {
  std::map<AgentId, ConstraintExpr> constraints;
  std::map<AgentId, MigrationPolicy> policies;
  Assignment old;
  for (const auto* a : scenario.all_agents()) {
    constraints[a->id] = a->constraint;
    policies[a->id] = a->policy;
    old[a->id] = a->initial;
  }
  Assignment complete = assignment;
  for (const auto* a : scenario.all_agents()) complete[a->id];  // absent = holds nothing
  const AgentViews views = truth_views(scenario.topology.resource_count(), complete);
  return global_cost(views, constraints, old, policies, scenario.topology, stats);
}

}  // namespace resmgm
