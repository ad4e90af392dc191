#include "resmgm/agent.hpp"

#include <algorithm>
#include <random>
#include <string>

namespace resmgm {

const char* to_string(Mode mode) {
  switch (mode) {
    case Mode::kWaitOk:
      return "wait_ok";
    case Mode::kWaitImprove:
      return "wait_improve";
    case Mode::kTerminated:
      return "terminated";
  }
  return "?";
}

ResourceSet initial_claims(const AgentSpec& spec, bool is_new,
                           const std::optional<Assignment>& prior, const Topology& topology,
                           const HeuristicConfig& config, std::uint64_t seed,
                           EvalStats* stats) {
  const std::size_t n = topology.resource_count();
  if (!config.smart_init) {
    std::mt19937_64 rng(seed ^ (0x9E3779B97F4A7C15ull * (spec.id + 1)));
    std::bernoulli_distribution coin(0.5);
    ResourceSet out;
    for (ResourceId r = 0; r < n; ++r)
      if (coin(rng)) out.insert(r);
    return out;
  }
  if (prior) {
    if (is_new) return {};
    auto it = prior->find(spec.id);
    if (it == prior->end()) return {};
    for (ResourceId r : it->second)
      if (r >= n)
        throw std::invalid_argument("prior assignment of agent " + std::to_string(spec.id) +
                                    " references unknown resource " + std::to_string(r));
    return it->second;
  }
  const std::map<AgentId, NeighborInfo> nobody;
  const ResourceSet empty;
  SearchContext ctx;
  ctx.topology = &topology;
  ctx.self = spec.id;
  ctx.constraint = &spec.constraint;
  ctx.old_assignment = is_new ? &empty : &spec.initial;
  ctx.policy = spec.policy;
  ctx.neighbors = &nobody;
  ctx.config = config;
  ctx.config.multi_variable_change = true;
  ctx.stats = stats;
  return find_best_move(ctx, empty).proposal;
}

bool assignment_conflict(const LocalView& v_a, const LocalView& v_b, AgentId owner_a,
                         AgentId owner_b) {
  if (owner_a == owner_b) return false;
  const std::size_t n = std::min(v_a.size(), v_b.size());
  for (ResourceId r = 0; r < n; ++r)
    if (v_a[r].owned_by(owner_a) && v_b[r].owned_by(owner_b)) return true;
  return false;
}

namespace {

ResourceSet new_claims(const Proposal& p) {
  ResourceSet out;
  std::set_difference(p.claims.begin(), p.claims.end(), p.committed.begin(),
                      p.committed.end(), std::inserter(out, out.end()));
  return out;
}

bool intersects(const ResourceSet& a, const ResourceSet& b) {
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i == *j) return true;
    if (*i < *j)
      ++i;
    else
      ++j;
  }
  return false;
}

}  // namespace

bool proposals_conflict(const Proposal& a, const Proposal& b,
                        const std::map<AgentId, ResourceSet>& committed,
                        const Topology& topology) {
  if (a.agent == b.agent) return false;
  if (intersects(a.claims, b.claims)) return true;
  const ResourceSet new_a = new_claims(a);
  const ResourceSet new_b = new_claims(b);
  if (intersects(new_a, b.committed) || intersects(new_b, a.committed)) return true;
  if (new_a.empty() || new_b.empty()) return false;
  for (const auto& [agent, held] : committed) {
    if (agent == a.agent || agent == b.agent) continue;
    if (intersects(new_a, held) && intersects(new_b, held)) return true;
  }
  std::set<TileId> tiles_a;
  for (ResourceId r : new_a) tiles_a.insert(topology.tile_of(r));
  for (ResourceId r : new_b)
    if (tiles_a.contains(topology.tile_of(r))) return true;
  return false;
}

bool beats(const Proposal& a, const Proposal& b) {
  if (a.improvement != b.improvement) return a.improvement > b.improvement;
  return a.agent < b.agent;
}

Agent::Agent(const Topology& topology, AgentSetup setup, HeuristicConfig config,
             ResourceSet initial, EvalStats* stats)
    : topology_(&topology),
      setup_(std::move(setup)),
      config_(std::move(config)),
      stats_(stats),
      committed_(std::move(initial)),
      view_(view_from_claims(topology.resource_count(), setup_.spec.id, committed_)) {
  if (setup_.neighbors.contains(setup_.spec.id))
    throw std::invalid_argument("agent cannot neighbour itself");
  if (setup_.max_distance == 0) throw std::invalid_argument("max_distance must be positive");
}

SearchContext Agent::context() {
  SearchContext ctx;
  ctx.topology = topology_;
  ctx.self = id();
  ctx.constraint = &setup_.spec.constraint;
  ctx.old_assignment = &setup_.spec.initial;
  ctx.policy = setup_.spec.policy;
  ctx.neighbors = &agent_views_;
  ctx.take_partners = &setup_.take_partners;
  ctx.allowed_tiles = setup_.allowed_tiles;
  if (config_.field_of_view_radius && !setup_.is_new) {
    const auto near = tiles_within(*topology_, committed_, *config_.field_of_view_radius);
    if (!ctx.allowed_tiles) {
      ctx.allowed_tiles = near;
    } else {
      for (std::size_t t = 0; t < near.size(); ++t)
        (*ctx.allowed_tiles)[t] = (*ctx.allowed_tiles)[t] && near[t];
    }
  }
  ctx.config = config_;
  ctx.stats = stats_;
  return ctx;
}

Outbox Agent::broadcast(const Message& msg) const {
  Outbox out;
  out.reserve(setup_.neighbors.size());
  for (AgentId n : setup_.neighbors) out.emplace_back(n, msg);
  return out;
}

OkMessage Agent::make_ok() {
  const SearchContext ctx = context();
  OkMessage ok;
  ok.sender = id();
  ok.view = view_;
  ok.change_round = observed_change_;
  ok.loss_map = compute_loss_map(ctx, committed_);
  ok.intrusion_map = compute_intrusion_map(ctx, committed_);
  return ok;
}

Outbox Agent::start() {
  if (mode_ != Mode::kWaitOk || round_ != 0 || counter_ != 0)
    throw ProtocolError("agent " + std::to_string(id()) + " started twice");
  if (setup_.neighbors.empty()) return {};
  return broadcast(make_ok());
}

void Agent::check_sender(AgentId sender, Mode expected, const std::set<AgentId>& heard) const {
  const std::string who = "agent " + std::to_string(id()) + ": ";
  if (!setup_.neighbors.contains(sender))
    throw ProtocolError(who + "message from non-neighbour " + std::to_string(sender));
  if (mode_ != expected)
    throw ProtocolError(who + "unexpected message from " + std::to_string(sender) +
                        " in mode " + to_string(mode_));
  if (heard.contains(sender))
    throw ProtocolError(who + "duplicate message from " + std::to_string(sender) +
                        " in round " + std::to_string(round_));
}

void Agent::compute_move() {
  const SearchContext ctx = context();
  move_ = find_best_move(ctx, committed_);
  can_move_ = move_.improvement.positive();
}

Outbox Agent::handle_ok(const OkMessage& msg) {
  check_sender(msg.sender, Mode::kWaitOk, heard_ok_);
  heard_ok_.insert(msg.sender);
  NeighborInfo& info = agent_views_[msg.sender];
  info.view = msg.view;
  info.claims = msg.view.owned_by(msg.sender);
  info.loss_map = msg.loss_map;
  info.intrusion_map = msg.intrusion_map;
  info.change_round = msg.change_round;
  for (ResourceId r = 0; r < view_.size(); ++r) {
    if (view_[r].owned_by(msg.sender) && !info.claims.contains(r)) view_[r] = Cell::free();
    if (info.claims.contains(r) && !committed_.contains(r)) view_[r] = Cell::owner(msg.sender);
  }
  if (++counter_ < setup_.neighbors.size()) return {};

  compute_move();
  ImproveMessage im;
  im.sender = id();
  im.proposed_view = merged_view(context(), move_.proposal);
  im.improvement = move_.improvement;
  im.current_cost = move_.current.as_cost();
  im.termination_counter = round_ - observed_change_;
  counter_ = 0;
  heard_ok_.clear();
  mode_ = Mode::kWaitImprove;
  return broadcast(im);
}

Proposal Agent::own_proposal() const {
  return Proposal{id(), committed_, move_.proposal, move_.improvement};
}

Proposal Agent::proposal_of(AgentId agent) const {
  if (agent == id()) return own_proposal();
  const ImproveMessage& im = improves_.at(agent);
  return Proposal{agent, agent_views_.at(agent).claims, im.proposed_view.owned_by(agent),
                  im.improvement};
}

Outbox Agent::handle_improve(const ImproveMessage& msg) {
  std::set<AgentId> heard;
  for (const auto& [sender, _] : improves_) heard.insert(sender);
  check_sender(msg.sender, Mode::kWaitImprove, heard);
  improves_[msg.sender] = msg;
  if (can_move_) {
    std::map<AgentId, ResourceSet> held;
    held[id()] = committed_;
    for (const auto& [agent, info] : agent_views_) held[agent] = info.claims;
    const Proposal theirs = proposal_of(msg.sender);
    const Proposal mine = own_proposal();
    if (proposals_conflict(theirs, mine, held, *topology_) && beats(theirs, mine))
      can_move_ = false;
  }
  if (++counter_ < setup_.neighbors.size()) return {};
  return finish_round();
}

bool Agent::would_move(AgentId taker) const {
  const Proposal t = proposal_of(taker);
  if (!t.improvement.positive()) return false;
  std::map<AgentId, ResourceSet> held;
  held[id()] = committed_;
  for (const auto& [agent, info] : agent_views_) held[agent] = info.claims;
  std::vector<AgentId> others{id()};
  for (AgentId n : setup_.neighbors)
    if (n != taker) others.push_back(n);
  for (AgentId x : others) {
    const Proposal p = proposal_of(x);
    if (proposals_conflict(p, t, held, *topology_) && beats(p, t)) return false;
  }
  return true;
}

Outbox Agent::finish_round() {
  ++round_;
  bool changed = false;
  if (can_move_) {
    committed_ = move_.proposal;
    changed = true;
  } else {
    for (AgentId taker : setup_.take_partners) {
      const ResourceSet wanted = improves_.at(taker).proposed_view.owned_by(taker);
      ResourceSet lost;
      for (ResourceId r : wanted)
        if (committed_.contains(r) && !agent_views_.at(taker).claims.contains(r)) lost.insert(r);
      if (lost.empty() || !would_move(taker)) continue;
      for (ResourceId r : lost) committed_.erase(r);
      changed = true;
    }
  }
  if (changed) last_change_round_ = round_;
  observed_change_ = last_change_round_;
  for (const auto& [agent, info] : agent_views_)
    observed_change_ = std::max(observed_change_, info.change_round);

  for (ResourceId r = 0; r < view_.size(); ++r) {
    if (view_[r].owned_by(id()) && !committed_.contains(r)) view_[r] = Cell::free();
    if (committed_.contains(r)) view_[r] = Cell::owner(id());
  }

  counter_ = 0;
  can_move_ = false;
  const bool out_of_rounds = round_ >= setup_.max_distance;
  const bool quiet = config_.early_termination &&
                     round_ - observed_change_ >= setup_.termination_threshold;
  if (out_of_rounds || quiet) {
    mode_ = Mode::kTerminated;
    improves_.clear();
    return {};
  }
  mode_ = Mode::kWaitOk;
  Outbox out = setup_.neighbors.empty() ? Outbox{} : broadcast(make_ok());
  improves_.clear();
  return out;
}

void Agent::step_isolated() {
  if (!setup_.neighbors.empty())
    throw ProtocolError("agent " + std::to_string(id()) + " has neighbours");
  if (mode_ == Mode::kTerminated) return;
  compute_move();
  finish_round();
}

Outbox Agent::receive(const Message& msg) {
  if (const auto* ok = std::get_if<OkMessage>(&msg)) return handle_ok(*ok);
  return handle_improve(std::get<ImproveMessage>(msg));
}

std::size_t Agent::state_bytes() const {
  const std::size_t r = topology_->resource_count();
  std::size_t bytes = 4 * 8 + 4 * setup_.neighbors.size() + 2 * r;
  for (const auto& [agent, info] : agent_views_)
    bytes += 8 + r + 12 * info.loss_map.size() + 12 * info.intrusion_map.size();
  bytes += improves_.size() * (32 + r);
  return bytes;
}

}  // namespace resmgm
