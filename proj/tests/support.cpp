#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "resmgm/constraint.hpp"
#include "resmgm/workload.hpp"

namespace resmgm::testing {

Topology regular_grid(int tiles_x, int tiles_y, int cores_per_tile) {
  return build_grid_topology(tiles_x, tiles_y, cores_per_tile,
                             std::vector<ResourceType>{ResourceType::kRegular});
}

long double reference_speedup(long double sigma, long double a, long double n) {
  if (n <= 0) return 0;
  if (sigma <= 1) {
    if (n <= a) return a * n / (a + sigma * (n - 1) / 2);
    if (n <= 2 * a - 1) return a * n / (sigma * (a - 0.5L) + n * (1 - sigma / 2));
    return a;
  }
  if (n <= a + a * sigma - sigma) return n * a * (sigma + 1) / (sigma * (n + a - 1) + a);
  return a;
}

ConstraintExpr random_constraint(std::mt19937_64& rng, int depth) {
  if (depth == 0 || std::bernoulli_distribution(0.3)(rng)) {
    if (std::bernoulli_distribution(0.5)(rng)) {
      const int lo = std::uniform_int_distribution<int>(1, 3)(rng);
      const int hi = std::uniform_int_distribution<int>(lo, 4)(rng);
      return pe_quantity(lo, hi);
    }
    return pe_type(static_cast<ResourceType>(std::uniform_int_distribution<int>(0, 2)(rng)));
  }
  ConstraintExpr l = random_constraint(rng, depth - 1);
  ConstraintExpr r = random_constraint(rng, depth - 1);
  return std::bernoulli_distribution(0.5)(rng) ? all_of(l, r) : any_of(l, r);
}

Scenario small_instance(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const int tiles = std::uniform_int_distribution<int>(1, 2)(rng);
  const int cores = std::uniform_int_distribution<int>(1, 4)(rng);
  std::vector<ResourceType> pattern;
  for (int t = 0; t < tiles; ++t)
    pattern.push_back(static_cast<ResourceType>(std::uniform_int_distribution<int>(0, 2)(rng)));
  const Topology topology = build_grid_topology(tiles, 1, cores, pattern);
  const auto resources = topology.resource_count();
  const int apriori = std::uniform_int_distribution<int>(0, 2)(rng);
  const bool movable = std::bernoulli_distribution(0.5)(rng);

  Scenario s{topology, {}, {}};
  std::vector<ResourceId> pool(resources);
  std::iota(pool.begin(), pool.end(), ResourceId{0});
  std::shuffle(pool.begin(), pool.end(), rng);
  std::size_t next = 0;
  for (int a = 0; a < apriori; ++a) {
    AgentSpec spec;
    spec.id = static_cast<AgentId>(a);
    spec.policy.movable = movable;
    const int k = std::uniform_int_distribution<int>(1, 2)(rng);
    for (int i = 0; i < k && next + 1 < pool.size(); ++i) spec.initial.insert(pool[next++]);
    if (spec.initial.empty()) break;
    const int held = static_cast<int>(spec.initial.size());
    spec.constraint = pe_quantity(held, held);
    const LocalView own = view_from_claims(resources, spec.id, spec.initial);
    for (int tries = 0; tries < 50; ++tries) {
      ConstraintExpr c = random_constraint(rng, 2);
      if (eval_constraint(c, own, spec.id, topology).is_finite()) {
        spec.constraint = c;
        break;
      }
    }
    s.apriori.push_back(std::move(spec));
  }
  AgentSpec request;
  request.id = static_cast<AgentId>(s.apriori.size());
  request.constraint = random_constraint(rng, 2);
  s.new_agents.push_back(std::move(request));
  return s;
}

Scenario suite_scenario(int agents, std::uint64_t seed) {
  const Topology topology = build_grid_topology(
      3, 1, 4,
      std::vector<ResourceType>{ResourceType::kRegular, ResourceType::kRegular,
                                ResourceType::kStream});
  WorkloadParams params;
  params.num_apriori = agents - 1;
  params.max_res_per_agent = 2;
  params.apriori_load =
      std::min(1.0, 1.5 * static_cast<double>(agents - 1) / static_cast<double>(12));
  params.new_agent.min_pes_low = 1;
  params.new_agent.min_pes_high = 2;
  params.new_agent.max_pes_low = 2;
  params.new_agent.max_pes_high = 3;
  return generate_scenario(topology, params, seed * 31 + static_cast<std::uint64_t>(agents));
}

const std::vector<Scenario>& standard_suite() {
  static const std::vector<Scenario> suite = [] {
    std::vector<Scenario> out;
    for (int agents = 4; agents <= 8; ++agents)
      for (std::uint64_t seed = 0; seed < 20; ++seed) out.push_back(suite_scenario(agents, seed));
    return out;
  }();
  return suite;
}

namespace {

Cost objective(const Scenario& s, const std::vector<int>& owner) {
  const auto resources = s.topology.resource_count();
  LocalView truth(resources);
  for (std::size_t r = 0; r < resources; ++r)
    if (owner[r] >= 0)
      truth[static_cast<ResourceId>(r)] = Cell::owner(static_cast<AgentId>(owner[r]));
  Cost total = Cost::zero();
  for (const AgentSpec* a : s.all_agents())
    total += eval_constraint(a->constraint, truth, a->id, s.topology);
  return total;
}

}  // namespace

Reference reference_optimum(const Scenario& s) {
  const auto resources = s.topology.resource_count();
  std::vector<int> owner(resources, -1);
  std::vector<ResourceId> open;
  for (const AgentSpec& a : s.apriori)
    for (ResourceId r : a.initial) owner[r] = static_cast<int>(a.id);
  for (std::size_t r = 0; r < resources; ++r)
    if (owner[r] < 0) open.push_back(static_cast<ResourceId>(r));
  std::vector<int> choices{-1};
  for (const AgentSpec& a : s.new_agents) choices.push_back(static_cast<int>(a.id));

  Reference best;
  std::vector<std::size_t> digit(open.size(), 0);
  while (true) {
    for (std::size_t i = 0; i < open.size(); ++i) owner[open[i]] = choices[digit[i]];
    const Cost c = objective(s, owner);
    if (best.count == 0 || c < best.cost) {
      best = {c, 1};
    } else if (c == best.cost) {
      ++best.count;
    }
    std::size_t i = 0;
    while (i < digit.size() && ++digit[i] == choices.size()) digit[i++] = 0;
    if (i == digit.size()) break;
  }
  return best;
}

bool disjoint(const Assignment& assignment) {
  ResourceSet seen;
  for (const auto& [agent, held] : assignment)
    for (ResourceId r : held)
      if (!seen.insert(r).second) return false;
  return true;
}

}  // namespace resmgm::testing
