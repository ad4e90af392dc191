#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "resmgm/view.hpp"

namespace resmgm {

enum class ResourceType : std::uint8_t { kRegular, kReconfig, kStream };

inline constexpr std::size_t kResourceTypeCount = 3;

std::string_view to_string(ResourceType type);
/// Case-insensitive; throws std::invalid_argument on an unknown name.
ResourceType parse_resource_type(std::string_view name);

struct GridCoord {
  int x = 0;
  int y = 0;
  friend bool operator==(GridCoord, GridCoord) = default;
};

/// Immutable tiled manycore system: resources grouped into tiles on a 2D grid,
/// each resource carrying a heterogeneous type.
class Topology {
 public:
  /// Validating constructor. `tile_of[r]`, `type_of[r]` describe resource r;
  /// `tile_grid[t]` the grid position of tile t.
  Topology(std::vector<TileId> tile_of, std::vector<ResourceType> type_of,
           std::vector<GridCoord> tile_grid);

  std::size_t resource_count() const { return tile_of_.size(); }
  std::size_t tile_count() const { return tile_grid_.size(); }

  TileId tile_of(ResourceId r) const { return tile_of_.at(r); }
  ResourceType type_of(ResourceId r) const { return type_of_.at(r); }
  GridCoord coord_of(TileId t) const { return tile_grid_.at(t); }
  const std::vector<ResourceId>& resources_of_tile(TileId t) const {
    return tile_resources_.at(t);
  }

  /// Manhattan distance between tile grid positions.
  int tile_distance(TileId a, TileId b) const;

  friend bool operator==(const Topology&, const Topology&) = default;

 private:
  std::vector<TileId> tile_of_;
  std::vector<ResourceType> type_of_;
  std::vector<GridCoord> tile_grid_;
  std::vector<std::vector<ResourceId>> tile_resources_;
};

/// Row-major grid of tiles, `cores_per_tile` resources each. Resource ids are
/// assigned tile by tile, core-major within a tile. Every resource takes the
/// type of its tile from `type_layout` (keyed by tile index); tiles missing
/// from the layout are REGULAR.
Topology build_grid_topology(int tiles_x, int tiles_y, int cores_per_tile,
                             const std::map<TileId, ResourceType>& type_layout);

/// Grid topology where tile i gets `pattern[i % pattern.size()]`.
Topology build_grid_topology(int tiles_x, int tiles_y, int cores_per_tile,
                             const std::vector<ResourceType>& pattern);

/// Near-square factorisation (x >= y) used when a sweep asks for `tiles` tiles.
std::pair<int, int> grid_shape_for(int tiles);

}  // namespace resmgm
