#pragma once

#include <cstddef>
#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace resmgm {

using AgentId = std::uint32_t;
using ResourceId = std::uint32_t;
using TileId = std::uint32_t;
using ResourceSet = std::set<ResourceId>;

/// Largest agent id representable in the one-byte-per-cell wire encoding.
inline constexpr AgentId kMaxAgentId = 253;

/// One entry of a local view: an owning agent, FREE, or UNKNOWN.
class Cell {
 public:
  enum class Kind : std::uint8_t { kOwner, kFree, kUnknown };

  constexpr Cell() = default;

  static constexpr Cell owner(AgentId agent) { return Cell(Kind::kOwner, agent); }
  static constexpr Cell free() { return Cell(Kind::kFree, 0); }
  static constexpr Cell unknown() { return Cell(Kind::kUnknown, 0); }

  constexpr Kind kind() const { return kind_; }
  constexpr bool is_free() const { return kind_ == Kind::kFree; }
  constexpr bool is_unknown() const { return kind_ == Kind::kUnknown; }
  constexpr bool is_owner() const { return kind_ == Kind::kOwner; }
  constexpr bool owned_by(AgentId agent) const {
    return kind_ == Kind::kOwner && agent_ == agent;
  }
  /// Owning agent; only meaningful when is_owner().
  constexpr AgentId agent() const { return agent_; }

  friend constexpr bool operator==(Cell, Cell) = default;

  std::string to_string() const;

 private:
  constexpr Cell(Kind kind, AgentId agent) : kind_(kind), agent_(agent) {}

  Kind kind_ = Kind::kFree;
  AgentId agent_ = 0;
};

/// An agent's belief about the owner of every resource, indexed by resource id.
class LocalView {
 public:
  LocalView() = default;
  explicit LocalView(std::size_t resources, Cell fill = Cell::free())
      : cells_(resources, fill) {}
  explicit LocalView(std::vector<Cell> cells) : cells_(std::move(cells)) {}

  std::size_t size() const { return cells_.size(); }
  Cell operator[](ResourceId r) const { return cells_[r]; }
  Cell& operator[](ResourceId r) { return cells_[r]; }
  std::span<const Cell> cells() const { return cells_; }

  auto begin() const { return cells_.begin(); }
  auto end() const { return cells_.end(); }

  /// Number of resources whose cell is Owner(agent).
  std::size_t count_owned(AgentId agent) const;
  /// Resources whose cell is Owner(agent).
  ResourceSet owned_by(AgentId agent) const;

  friend bool operator==(const LocalView&, const LocalView&) = default;

  std::string to_string() const;

 private:
  std::vector<Cell> cells_;
};

/// View of `resources` cells where exactly `claimed` are Owner(agent), rest FREE.
LocalView view_from_claims(std::size_t resources, AgentId agent,
                           const ResourceSet& claimed);

}  // namespace resmgm
