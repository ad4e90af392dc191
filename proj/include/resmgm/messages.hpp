#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <variant>
#include <vector>

#include "resmgm/cost.hpp"
#include "resmgm/view.hpp"

namespace resmgm {

/// Announces the sender's committed view at the start of a round.
struct OkMessage {
  AgentId sender = 0;
  LocalView view;
  /// Latest round in which the sender changed or observed a change.
  std::uint32_t change_round = 0;
  /// Cost increase the sender suffers when giving up each held resource.
  std::map<ResourceId, Cost> loss_map;
  /// Cost increase the sender suffers if another agent moves onto a free
  /// core of the tile (non-zero entries only).
  std::map<TileId, Cost> intrusion_map;

  friend bool operator==(const OkMessage&, const OkMessage&) = default;
};

/// Announces the sender's best proposal for this round and its improvement.
struct ImproveMessage {
  AgentId sender = 0;
  LocalView proposed_view;
  Improvement improvement;
  Cost current_cost;
  std::uint32_t termination_counter = 0;

  friend bool operator==(const ImproveMessage&, const ImproveMessage&) = default;
};

using Message = std::variant<OkMessage, ImproveMessage>;

enum class MessageKind : std::uint8_t { kOk = 1, kImprove = 2 };

inline MessageKind kind_of(const Message& m) {
  return std::holds_alternative<OkMessage>(m) ? MessageKind::kOk : MessageKind::kImprove;
}
inline AgentId sender_of(const Message& m) {
  return std::visit([](const auto& x) { return x.sender; }, m);
}

// Canonical wire encoding: fixed-width little-endian integers, IEEE-754
// doubles, one byte per view cell (agent id, 0xFE = UNKNOWN, 0xFF = FREE),
// maps as (key, value) pairs sorted by key, each prefixed by a u32 count.
std::vector<std::byte> encode(const Message& message);
/// Throws std::invalid_argument on malformed input.
Message decode(std::span<const std::byte> bytes);
std::size_t encoded_size(const Message& message);

}  // namespace resmgm
