#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "resmgm/constraint.hpp"
#include "resmgm/topology.hpp"
#include "resmgm/view.hpp"

namespace resmgm {

using TypeCounts = std::array<std::uint32_t, kResourceTypeCount>;

/// Node of the k-d tree. Node 0 is the root; children of a node at level l
/// are cut along axis l % 2 (0 = vertical cut on x, 1 = horizontal on y).
struct PartitionNode {
  int level = 0;
  int axis = 0;
  int parent = -1;
  int low = -1;
  int high = -1;
  std::vector<TileId> tiles;
  /// Agent -> number of resources it owns inside the node.
  std::map<AgentId, std::uint32_t> residents;
  TypeCounts free{};
  TypeCounts total{};

  bool is_leaf() const { return low < 0; }

  friend bool operator==(const PartitionNode&, const PartitionNode&) = default;
};

class PartitionTree {
 public:
  PartitionTree() = default;

  int depth() const { return depth_; }
  const std::vector<PartitionNode>& nodes() const { return nodes_; }
  const PartitionNode& node(int index) const { return nodes_.at(index); }
  std::vector<int> leaves() const;
  int leaf_of_tile(TileId tile) const { return leaf_of_tile_.at(tile); }
  std::set<AgentId> residents(int index) const;

  friend bool operator==(const PartitionTree&, const PartitionTree&) = default;

 private:
  friend PartitionTree build_tree(const Topology&, const LocalView&, int);
  friend void update_tree(PartitionTree&, const Topology&, ResourceId, Cell, Cell);

  int depth_ = 0;
  std::vector<PartitionNode> nodes_;
  std::vector<int> leaf_of_tile_;
};

/// floor(log2(tiles)); 0 for a single tile (no tree).
int default_partition_depth(const Topology& topology);

/// Median split on alternating axes; odd counts give the extra tile to the
/// low side. Throws std::invalid_argument unless 1 <= depth and
/// 2^depth <= tile count, or if the allocation size mismatches.
PartitionTree build_tree(const Topology& topology, const LocalView& allocation, int depth);

/// Moves `resource` from `old_owner` to `new_owner` along its leaf-to-root path.
void update_tree(PartitionTree& tree, const Topology& topology, ResourceId resource,
                 Cell old_owner, Cell new_owner);

/// Agents to negotiate with and the tiles a request may be placed on.
struct Negotiation {
  std::set<AgentId> participants;
  /// Tile mask of the search region.
  std::vector<bool> region;
  /// Node chosen for a TileSharing request, or -1.
  int exclusive_node = -1;
};

/// With TileSharing in the constraint: the shallowest node whose residents
/// are at most the requester and which has at least min_demand free
/// resources of a requested type. Otherwise (or if no such node exists)
/// every leaf holding a requested type, with all its residents.
Negotiation select_negotiation(const PartitionTree& tree, const Topology& topology,
                               const ConstraintExpr& constraint, AgentId requester);

/// Participants of select_negotiation.
std::set<AgentId> select_participants(const PartitionTree& tree, const Topology& topology,
                                      const ConstraintExpr& constraint, AgentId requester);

}  // namespace resmgm
