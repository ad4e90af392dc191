#include "resmgm/partition.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>
#include <string>

namespace resmgm {

std::vector<int> PartitionTree::leaves() const {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(nodes_.size()); ++i)
    if (nodes_[i].is_leaf()) out.push_back(i);
  return out;
}

std::set<AgentId> PartitionTree::residents(int index) const {
  std::set<AgentId> out;
  for (const auto& [agent, count] : nodes_.at(index).residents) out.insert(agent);
  return out;
}

int default_partition_depth(const Topology& topology) {
  return std::bit_width(topology.tile_count()) - 1;
}

namespace {

std::size_t type_index(const Topology& topology, ResourceId r) {
  return static_cast<std::size_t>(topology.type_of(r));
}

void apply(PartitionNode& node, const Topology& topology, ResourceId r, Cell cell, int sign) {
  const std::size_t t = type_index(topology, r);
  if (cell.is_free()) node.free[t] += sign;
  if (!cell.is_owner()) return;
  auto& count = node.residents[cell.agent()];
  count += sign;
  if (count == 0) node.residents.erase(cell.agent());
}

}  // namespace

PartitionTree build_tree(const Topology& topology, const LocalView& allocation, int depth) {
  if (allocation.size() != topology.resource_count())
    throw std::invalid_argument("allocation size does not match the topology");
  if (depth < 1 || depth >= 31 || (std::size_t{1} << depth) > topology.tile_count())
    throw std::invalid_argument("partition depth " + std::to_string(depth) +
                                " does not fit " + std::to_string(topology.tile_count()) +
                                " tiles");
  PartitionTree tree;
  tree.depth_ = depth;
  tree.leaf_of_tile_.assign(topology.tile_count(), -1);

  PartitionNode root;
  for (TileId t = 0; t < topology.tile_count(); ++t) root.tiles.push_back(t);
  tree.nodes_.push_back(std::move(root));

  for (std::size_t i = 0; i < tree.nodes_.size(); ++i) {
    if (tree.nodes_[i].level == depth) continue;
    std::vector<TileId> tiles = tree.nodes_[i].tiles;
    const int axis = tree.nodes_[i].level % 2;
    std::sort(tiles.begin(), tiles.end(), [&](TileId a, TileId b) {
      const GridCoord ca = topology.coord_of(a);
      const GridCoord cb = topology.coord_of(b);
      const int ka = axis == 0 ? ca.x : ca.y;
      const int kb = axis == 0 ? cb.x : cb.y;
      const int sa = axis == 0 ? ca.y : ca.x;
      const int sb = axis == 0 ? cb.y : cb.x;
      return std::tie(ka, sa, a) < std::tie(kb, sb, b);
    });
    const std::size_t half = (tiles.size() + 1) / 2;
    for (int side = 0; side < 2; ++side) {
      PartitionNode child;
      child.level = tree.nodes_[i].level + 1;
      child.axis = child.level % 2;
      child.parent = static_cast<int>(i);
      auto first = tiles.begin() + (side == 0 ? 0 : static_cast<long>(half));
      auto last = side == 0 ? tiles.begin() + static_cast<long>(half) : tiles.end();
      child.tiles.assign(first, last);
      std::sort(child.tiles.begin(), child.tiles.end());
      const int index = static_cast<int>(tree.nodes_.size());
      (side == 0 ? tree.nodes_[i].low : tree.nodes_[i].high) = index;
      tree.nodes_.push_back(std::move(child));
    }
  }

  for (int i = 0; i < static_cast<int>(tree.nodes_.size()); ++i)
    if (tree.nodes_[i].is_leaf())
      for (TileId t : tree.nodes_[i].tiles) tree.leaf_of_tile_[t] = i;

  for (ResourceId r = 0; r < topology.resource_count(); ++r) {
    for (int n = tree.leaf_of_tile_[topology.tile_of(r)]; n >= 0; n = tree.nodes_[n].parent) {
      ++tree.nodes_[n].total[type_index(topology, r)];
      apply(tree.nodes_[n], topology, r, allocation[r], +1);
    }
  }
  return tree;
}

void update_tree(PartitionTree& tree, const Topology& topology, ResourceId resource,
                 Cell old_owner, Cell new_owner) {
  if (resource >= topology.resource_count())
    throw std::invalid_argument("unknown resource " + std::to_string(resource));
  if (old_owner == new_owner) return;
  for (int n = tree.leaf_of_tile_.at(topology.tile_of(resource)); n >= 0;
       n = tree.nodes_[n].parent) {
    apply(tree.nodes_[n], topology, resource, old_owner, -1);
    apply(tree.nodes_[n], topology, resource, new_owner, +1);
  }
}

Negotiation select_negotiation(const PartitionTree& tree, const Topology& topology,
                               const ConstraintExpr& constraint, AgentId requester) {
  const auto types = requested_types(constraint);
  auto count_requested = [&](const TypeCounts& counts) {
    std::uint32_t n = 0;
    for (std::size_t t = 0; t < kResourceTypeCount; ++t)
      if (types[t]) n += counts[t];
    return n;
  };

  Negotiation out;
  out.region.assign(topology.tile_count(), false);

  if (contains_tile_sharing(constraint)) {
    const auto need = static_cast<std::uint32_t>(std::max(1, min_demand(constraint)));
    // Nodes are stored level by level, so the first match is the shallowest.
    for (int i = 0; i < static_cast<int>(tree.nodes().size()); ++i) {
      const PartitionNode& node = tree.node(i);
      const bool exclusive =
          std::all_of(node.residents.begin(), node.residents.end(),
                      [&](const auto& entry) { return entry.first == requester; });
      if (!exclusive || count_requested(node.free) < need) continue;
      out.exclusive_node = i;
      for (TileId t : node.tiles) out.region[t] = true;
      for (const auto& [agent, count] : node.residents)
        if (agent != requester) out.participants.insert(agent);
      return out;
    }
  }

  for (int leaf : tree.leaves()) {
    const PartitionNode& node = tree.node(leaf);
    if (count_requested(node.total) == 0) continue;
    for (TileId t : node.tiles) out.region[t] = true;
    for (const auto& [agent, count] : node.residents)
      if (agent != requester) out.participants.insert(agent);
  }
  return out;
}

std::set<AgentId> select_participants(const PartitionTree& tree, const Topology& topology,
                                      const ConstraintExpr& constraint, AgentId requester) {
  return select_negotiation(tree, topology, constraint, requester).participants;
}

}  // namespace resmgm
