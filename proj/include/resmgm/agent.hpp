#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

#include "resmgm/dcop.hpp"
#include "resmgm/local_search.hpp"
#include "resmgm/messages.hpp"

namespace resmgm {

class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Mode : std::uint8_t { kWaitOk, kWaitImprove, kTerminated };

const char* to_string(Mode mode);

/// Everything the harness decides about an agent before the run starts.
struct AgentSetup {
  AgentSpec spec;
  bool is_new = false;
  std::set<AgentId> neighbors;
  /// Neighbours with the same closed neighbourhood; only these may be
  /// targeted by take moves.
  std::set<AgentId> take_partners;
  /// Tiles the agent may acquire resources on; unset = all tiles.
  std::optional<std::vector<bool>> allowed_tiles;
  std::uint32_t max_distance = 1;
  /// Effective early-termination window (>= the configured threshold).
  std::uint32_t termination_threshold = 2;
};

using Outbox = std::vector<std::pair<AgentId, Message>>;

/// Starting claims of an agent.
///
/// With smart_init: the prior holding if one is given (empty for new
/// agents), otherwise a local optimum computed without regard for other
/// agents. Without smart_init: every resource claimed with probability 1/2,
/// seeded by (seed, agent id).
/// Throws std::invalid_argument if the prior references an unknown resource.
ResourceSet initial_claims(const AgentSpec& spec, bool is_new,
                           const std::optional<Assignment>& prior, const Topology& topology,
                           const HeuristicConfig& config, std::uint64_t seed,
                           EvalStats* stats = nullptr);

/// True iff some resource is Owner(owner_a) in v_a and Owner(owner_b) in v_b.
bool assignment_conflict(const LocalView& v_a, const LocalView& v_b, AgentId owner_a,
                         AgentId owner_b);

/// One agent's round proposal as seen by the conflict test.
struct Proposal {
  AgentId agent = 0;
  ResourceSet committed;
  ResourceSet claims;
  Improvement improvement;
};

/// Whether two proposals may not both be committed in the same round:
/// a double claim, one taking from the other, a common victim, or new
/// claims on a common tile. `committed` holds the known committed sets of
/// third parties.
bool proposals_conflict(const Proposal& a, const Proposal& b,
                        const std::map<AgentId, ResourceSet>& committed,
                        const Topology& topology);

/// Larger improvement wins; ties go to the smaller agent id.
bool beats(const Proposal& a, const Proposal& b);

/// One RESMGM agent; its id doubles as the tie-breaking uid. Alternates
/// between wait-ok and wait-improve until it terminates. Handlers return the
/// messages to send, keyed by recipient.
class Agent {
 public:
  Agent(const Topology& topology, AgentSetup setup, HeuristicConfig config,
        ResourceSet initial, EvalStats* stats = nullptr);

  AgentId id() const { return setup_.spec.id; }
  Mode mode() const { return mode_; }
  std::uint32_t round() const { return round_; }
  std::uint32_t last_change_round() const { return last_change_round_; }
  const ResourceSet& committed() const { return committed_; }
  const LocalView& view() const { return view_; }
  const std::set<AgentId>& neighbors() const { return setup_.neighbors; }
  bool can_move() const { return can_move_; }
  const MoveResult& last_move() const { return move_; }
  std::uint32_t counter() const { return counter_; }

  /// Initial ok? to every neighbour.
  Outbox start();
  Outbox handle_ok(const OkMessage& msg);
  Outbox handle_improve(const ImproveMessage& msg);
  Outbox receive(const Message& msg);
  /// A whole round for an agent without neighbours.
  void step_isolated();

  /// Size of the agent's state in the wire encoding.
  std::size_t state_bytes() const;

 private:
  SearchContext context();
  void compute_move();
  Outbox broadcast(const Message& msg) const;
  Outbox finish_round();
  OkMessage make_ok();
  void check_sender(AgentId sender, Mode expected, const std::set<AgentId>& heard) const;
  bool would_move(AgentId taker) const;
  Proposal own_proposal() const;
  Proposal proposal_of(AgentId agent) const;

  const Topology* topology_;
  AgentSetup setup_;
  HeuristicConfig config_;
  EvalStats* stats_;

  ResourceSet committed_;
  LocalView view_;
  Mode mode_ = Mode::kWaitOk;
  std::uint32_t counter_ = 0;
  std::uint32_t round_ = 0;
  std::uint32_t last_change_round_ = 0;
  std::uint32_t observed_change_ = 0;
  bool can_move_ = false;
  MoveResult move_;

  std::map<AgentId, NeighborInfo> agent_views_;
  std::set<AgentId> heard_ok_;
  std::map<AgentId, ImproveMessage> improves_;
};

}  // namespace resmgm
