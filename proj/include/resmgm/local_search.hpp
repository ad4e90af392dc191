#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "resmgm/constraint.hpp"
#include "resmgm/cost.hpp"
#include "resmgm/topology.hpp"
#include "resmgm/view.hpp"

namespace resmgm {

/// Individual RESMGM heuristics. All-off is plain MGM.
struct HeuristicConfig {
  bool smart_init = true;
  bool early_termination = true;
  std::uint32_t early_term_threshold = 2;
  bool local_search_zero_cutoff = true;
  bool loss_aware_targeting = true;
  bool tile_iteration = true;
  bool thinking_globally = true;
  bool multi_variable_change = true;
  std::optional<int> field_of_view_radius;
  /// 0 selects the default of 4 x (number of participating agents).
  std::uint32_t max_distance = 0;
  /// Restrict negotiations with the partition tree.
  bool partition_pruning = true;
  /// 0 selects the default depth for the topology.
  int partition_depth = 0;

  static HeuristicConfig full();
  static HeuristicConfig plain_mgm();

  /// Throws std::invalid_argument when the threshold exceeds max_distance.
  void validate() const;

  friend bool operator==(const HeuristicConfig&, const HeuristicConfig&) = default;
};

/// What an agent learnt from one neighbour's ok? message this round.
struct NeighborInfo {
  LocalView view;
  ResourceSet claims;
  std::map<ResourceId, Cost> loss_map;
  std::map<TileId, Cost> intrusion_map;
  std::uint32_t change_round = 0;
};

/// Inputs of the per-agent local search.
struct SearchContext {
  const Topology* topology = nullptr;
  AgentId self = 0;
  const ConstraintExpr* constraint = nullptr;
  const ResourceSet* old_assignment = nullptr;
  MigrationPolicy policy;
  const std::map<AgentId, NeighborInfo>* neighbors = nullptr;
  /// Neighbours this agent may take resources from.
  const std::set<AgentId>* take_partners = nullptr;
  /// Tiles the agent may acquire resources on; unset = all tiles.
  std::optional<std::vector<bool>> allowed_tiles;
  HeuristicConfig config;
  EvalStats* stats = nullptr;
};

struct MoveResult {
  ResourceSet proposal;
  Score current;
  Score best;
  Improvement improvement;
  /// Resources in `proposal` taken from a neighbour, with that neighbour.
  std::map<ResourceId, AgentId> takes;
};

/// View with the agent's `claims` and every neighbour's latest claims; all
/// other cells FREE. Where a neighbour and the agent both claim a resource
/// the agent's claim is shown.
LocalView merged_view(const SearchContext& ctx, const ResourceSet& claims);

/// Extended local cost of holding `claims`: own constraint and migration,
/// plus double claims, neighbours' reported losses for taken resources and
/// neighbours' intrusion costs. `committed` is the agent's current holding.
Score score_claims(const SearchContext& ctx, const ResourceSet& committed,
                   const ResourceSet& claims);

/// Greedy local search from `committed` (see HeuristicConfig for the knobs).
MoveResult find_best_move(const SearchContext& ctx, const ResourceSet& committed);

/// Cost increase for giving up each held resource. Agents whose constraint
/// contains TileSharing report infinity: they never hand out cores.
std::map<ResourceId, Cost> compute_loss_map(const SearchContext& ctx,
                                            const ResourceSet& committed);

/// Tiles on which a newcomer would hurt this agent: every held tile of an
/// agent whose constraint contains TileSharing, at infinite cost.
std::map<TileId, Cost> compute_intrusion_map(const SearchContext& ctx,
                                             const ResourceSet& committed);

/// Tiles within `radius` (Manhattan) of any tile holding a resource in `held`.
std::vector<bool> tiles_within(const Topology& topology, const ResourceSet& held, int radius);

}  // namespace resmgm
