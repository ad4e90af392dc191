#include "resmgm/workload.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

namespace resmgm {

void ConstraintParams::validate() const {
  if (min_pes_low < 1 || min_pes_low > min_pes_high || min_pes_high > 9)
    throw std::invalid_argument("min_pes range must satisfy 1 <= low <= high <= 9");
  if (max_pes_low > max_pes_high || max_pes_high > 9 || max_pes_high < min_pes_high)
    throw std::invalid_argument(
        "max_pes range must satisfy low <= high <= 9 and reach min_pes_high");
  if (parallelism_low < 1 || parallelism_low > parallelism_high)
    throw std::invalid_argument("parallelism range must satisfy 1 <= low <= high");
  if (!(sigma_low > 0.0) || sigma_low > sigma_high)
    throw std::invalid_argument("sigma range must satisfy 0 < low <= high");
  if (!(tile_sharing_prob >= 0.0 && tile_sharing_prob <= 1.0))
    throw std::invalid_argument("tile_sharing_prob must lie in [0, 1]");
}

namespace {

ConstraintExpr sample_downey(const ConstraintParams& params, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> avg(params.parallelism_low, params.parallelism_high);
  std::uniform_real_distribution<double> sigma(params.sigma_low, params.sigma_high);
  const int a = avg(rng);
  const double s = sigma(rng);
  return downey(s, a);
}

}  // namespace

ConstraintExpr generate_multigrid_constraint(const ConstraintParams& params,
                                             std::uint64_t seed) {
  params.validate();
  std::mt19937_64 rng(seed);
  const int min_pes =
      std::uniform_int_distribution<int>(params.min_pes_low, params.min_pes_high)(rng);
  const int max_pes = std::uniform_int_distribution<int>(std::max(min_pes, params.max_pes_low),
                                                         params.max_pes_high)(rng);
  ConstraintExpr out = all_of(pe_quantity(min_pes, max_pes), sample_downey(params, rng));
  if (std::bernoulli_distribution(params.tile_sharing_prob)(rng))
    out = all_of(out, tile_sharing());
  return out;
}

std::size_t preallocated_count(double load, std::size_t resources) {
  if (!(load >= 0.0 && load <= 1.0)) throw std::invalid_argument("load must lie in [0, 1]");
  return static_cast<std::size_t>(std::floor(load * static_cast<double>(resources) + 1e-9));
}

Scenario generate_scenario(const Topology& topology, const WorkloadParams& params,
                           std::uint64_t seed) {
  if (params.num_apriori < 0 || params.max_res_per_agent < 1)
    throw std::invalid_argument("need num_apriori >= 0 and max_res_per_agent >= 1");
  if (params.num_apriori + 1 > static_cast<int>(kMaxAgentId) + 1)
    throw std::invalid_argument("too many agents for the wire encoding");
  params.new_agent.validate();

  const std::size_t total = preallocated_count(params.apriori_load, topology.resource_count());
  const auto agents = static_cast<std::size_t>(params.num_apriori);
  const auto cap = static_cast<std::size_t>(params.max_res_per_agent);
  if (total < agents || total > agents * cap)
    throw std::invalid_argument(std::to_string(total) +
                                " pre-allocated resources cannot be split over " +
                                std::to_string(agents) + " agents holding 1.." +
                                std::to_string(cap) + " each");

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> counts(agents, 1);
  for (std::size_t extra = total - agents; extra > 0; --extra) {
    std::vector<std::size_t> open;
    for (std::size_t i = 0; i < agents; ++i)
      if (counts[i] < cap) open.push_back(i);
    ++counts[open[std::uniform_int_distribution<std::size_t>(0, open.size() - 1)(rng)]];
  }

  std::vector<ResourceId> pool(topology.resource_count());
  std::iota(pool.begin(), pool.end(), ResourceId{0});
  std::shuffle(pool.begin(), pool.end(), rng);

  Scenario scenario{topology, {}, {}};
  std::size_t next = 0;
  for (std::size_t i = 0; i < agents; ++i) {
    AgentSpec spec;
    spec.id = static_cast<AgentId>(i);
    spec.policy = params.apriori_policy;
    for (std::size_t k = 0; k < counts[i]; ++k) spec.initial.insert(pool[next++]);

    const int n = static_cast<int>(counts[i]);
    ConstraintExpr c = pe_quantity(n, n);
    const ResourceType first = topology.type_of(*spec.initial.begin());
    const bool single_type =
        std::all_of(spec.initial.begin(), spec.initial.end(),
                    [&](ResourceId r) { return topology.type_of(r) == first; });
    if (single_type) c = all_of(c, pe_type(first));
    spec.constraint = all_of(c, sample_downey(params.new_agent, rng));
    scenario.apriori.push_back(std::move(spec));
  }

  AgentSpec request;
  request.id = static_cast<AgentId>(agents);
  request.constraint = generate_multigrid_constraint(params.new_agent, rng());
  scenario.new_agents.push_back(std::move(request));
  return scenario;
}

}  // namespace resmgm
