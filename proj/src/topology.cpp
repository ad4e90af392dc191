#include "resmgm/topology.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <stdexcept>

namespace resmgm {

std::string_view to_string(ResourceType type) {
  switch (type) {
    case ResourceType::kRegular:
      return "REGULAR";
    case ResourceType::kReconfig:
      return "RECONFIG";
    case ResourceType::kStream:
      return "STREAM";
  }
  return "?";
}

ResourceType parse_resource_type(std::string_view name) {
  std::string upper(name);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return std::toupper(c); });
  if (upper == "REGULAR") return ResourceType::kRegular;
  if (upper == "RECONFIG") return ResourceType::kReconfig;
  if (upper == "STREAM") return ResourceType::kStream;
  throw std::invalid_argument("unknown resource type '" + std::string(name) + "'");
}

Topology::Topology(std::vector<TileId> tile_of, std::vector<ResourceType> type_of,
                   std::vector<GridCoord> tile_grid)
    : tile_of_(std::move(tile_of)),
      type_of_(std::move(type_of)),
      tile_grid_(std::move(tile_grid)) {
  if (tile_of_.size() != type_of_.size())
    throw std::invalid_argument("tile and type maps must cover the same resources");
  if (tile_grid_.empty()) throw std::invalid_argument("topology needs at least one tile");
  for (std::size_t a = 0; a < tile_grid_.size(); ++a)
    for (std::size_t b = a + 1; b < tile_grid_.size(); ++b)
      if (tile_grid_[a] == tile_grid_[b])
        throw std::invalid_argument("duplicate tile grid coordinate");

  tile_resources_.resize(tile_grid_.size());
  for (ResourceId r = 0; r < tile_of_.size(); ++r) {
    if (tile_of_[r] >= tile_grid_.size())
      throw std::invalid_argument("resource mapped to unknown tile");
    tile_resources_[tile_of_[r]].push_back(r);
  }
  for (const auto& members : tile_resources_)
    if (members.empty()) throw std::invalid_argument("every tile needs a resource");
}

int Topology::tile_distance(TileId a, TileId b) const {
  if (a >= tile_count() || b >= tile_count())
    throw std::invalid_argument("tile_distance: unknown tile");
  const GridCoord ca = tile_grid_[a];
  const GridCoord cb = tile_grid_[b];
  return std::abs(ca.x - cb.x) + std::abs(ca.y - cb.y);
}

Topology build_grid_topology(int tiles_x, int tiles_y, int cores_per_tile,
                             const std::map<TileId, ResourceType>& type_layout) {
  if (tiles_x <= 0 || tiles_y <= 0 || cores_per_tile <= 0)
    throw std::invalid_argument("grid dimensions must be positive");
  const auto tiles = static_cast<TileId>(tiles_x * tiles_y);

  std::vector<GridCoord> grid;
  grid.reserve(tiles);
  for (int y = 0; y < tiles_y; ++y)
    for (int x = 0; x < tiles_x; ++x) grid.push_back({x, y});

  for (const auto& [t, type] : type_layout)
    if (t >= tiles)
      throw std::invalid_argument("type layout names unknown tile " + std::to_string(t));

  std::vector<TileId> tile_of;
  std::vector<ResourceType> type_of;
  for (TileId t = 0; t < tiles; ++t) {
    const auto it = type_layout.find(t);
    const ResourceType type = it == type_layout.end() ? ResourceType::kRegular : it->second;
    for (int c = 0; c < cores_per_tile; ++c) {
      tile_of.push_back(t);
      type_of.push_back(type);
    }
  }
  return Topology(std::move(tile_of), std::move(type_of), std::move(grid));
}

Topology build_grid_topology(int tiles_x, int tiles_y, int cores_per_tile,
                             const std::vector<ResourceType>& pattern) {
  if (pattern.empty()) throw std::invalid_argument("empty type pattern");
  if (tiles_x <= 0 || tiles_y <= 0)
    throw std::invalid_argument("grid dimensions must be positive");
  std::map<TileId, ResourceType> layout;
  const auto tiles = static_cast<TileId>(tiles_x * tiles_y);
  for (TileId t = 0; t < tiles; ++t) layout[t] = pattern[t % pattern.size()];
  return build_grid_topology(tiles_x, tiles_y, cores_per_tile, layout);
}

std::pair<int, int> grid_shape_for(int tiles) {
  if (tiles <= 0) throw std::invalid_argument("tile count must be positive");
  int best_y = 1;
  for (int y = 1; y * y <= tiles; ++y)
    if (tiles % y == 0) best_y = y;
  return {tiles / best_y, best_y};
}

}  // namespace resmgm
