#include "resmgm/local_search.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <stdexcept>
#include <tuple>

namespace resmgm {

HeuristicConfig HeuristicConfig::full() { return HeuristicConfig{}; }

HeuristicConfig HeuristicConfig::plain_mgm() {
  HeuristicConfig c;
  c.smart_init = false;
  c.early_termination = false;
  c.local_search_zero_cutoff = false;
  c.loss_aware_targeting = false;
  c.tile_iteration = false;
  c.thinking_globally = false;
  c.multi_variable_change = false;
  c.field_of_view_radius.reset();
  c.partition_pruning = false;
  return c;
}

void HeuristicConfig::validate() const {
  if (early_term_threshold == 0)
    throw std::invalid_argument("early termination threshold must be positive");
  if (max_distance != 0 && early_term_threshold > max_distance)
    throw std::invalid_argument("early termination threshold exceeds max_distance");
  if (field_of_view_radius && *field_of_view_radius < 0)
    throw std::invalid_argument("field of view radius must be non-negative");
  if (partition_depth < 0) throw std::invalid_argument("partition depth must be >= 0");
}

namespace {

constexpr std::uint32_t kNoOwner = 0xFFFFFFFFu;
constexpr std::size_t kMaxBlock = 9;

/// Lowest neighbour claiming each resource, or kNoOwner.
std::vector<std::uint32_t> neighbor_owners(const SearchContext& ctx) {
  std::vector<std::uint32_t> owner(ctx.topology->resource_count(), kNoOwner);
  for (const auto& [agent, info] : *ctx.neighbors)
    for (ResourceId r : info.claims)
      if (owner[r] == kNoOwner) owner[r] = agent;
  return owner;
}

bool tile_allowed(const SearchContext& ctx, TileId t) {
  return !ctx.allowed_tiles || (*ctx.allowed_tiles)[t];
}

bool is_partner(const SearchContext& ctx, AgentId agent) {
  return ctx.take_partners && ctx.take_partners->contains(agent);
}

Cost lookup(const std::map<ResourceId, Cost>& m, ResourceId key) {
  auto it = m.find(key);
  return it == m.end() ? Cost::infinity() : it->second;
}

struct Candidate {
  std::vector<ResourceId> add;
  std::vector<ResourceId> remove;
  double order_key = 0.0;
  ResourceId order_id = 0;
};

std::size_t occupied_tiles(const Topology& topo, const ResourceSet& claims) {
  std::set<TileId> tiles;
  for (ResourceId r : claims) tiles.insert(topo.tile_of(r));
  return tiles.size();
}

std::uint64_t id_sum(const ResourceSet& claims) {
  return std::accumulate(claims.begin(), claims.end(), std::uint64_t{0});
}

std::vector<Candidate> generate(const SearchContext& ctx, const ResourceSet& claims,
                                const std::vector<std::uint32_t>& owner,
                                const std::set<AgentId>& victims) {
  const Topology& topo = *ctx.topology;
  const HeuristicConfig& cfg = ctx.config;
  std::vector<Candidate> acquisitions;
  std::vector<Candidate> releases;

  for (ResourceId r : claims) {
    Candidate c;
    c.remove = {r};
    c.order_id = r;
    releases.push_back(c);
  }

  if (cfg.tile_iteration && contains_tile_sharing(*ctx.constraint)) {
    for (TileId t = 0; t < topo.tile_count(); ++t) {
      if (!tile_allowed(ctx, t)) continue;
      const auto& members = topo.resources_of_tile(t);
      const bool foreign = std::any_of(members.begin(), members.end(), [&](ResourceId r) {
        return owner[r] != kNoOwner && !claims.contains(r);
      });
      if (foreign) continue;
      std::vector<ResourceId> free_cores;
      for (ResourceId r : members)
        if (!claims.contains(r)) free_cores.push_back(r);
      for (std::size_t k = 1; k <= free_cores.size(); ++k) {
        Candidate c;
        c.add.assign(free_cores.begin(), free_cores.begin() + static_cast<long>(k));
        c.order_id = free_cores.front();
        acquisitions.push_back(std::move(c));
      }
    }
  } else {
    for (ResourceId r = 0; r < topo.resource_count(); ++r) {
      if (claims.contains(r) || !tile_allowed(ctx, topo.tile_of(r))) continue;
      Candidate c;
      c.add = {r};
      c.order_id = r;
      if (owner[r] == kNoOwner) {
        acquisitions.push_back(std::move(c));
        continue;
      }
      const AgentId victim = owner[r];
      if (!cfg.thinking_globally || !is_partner(ctx, victim) || victims.contains(victim))
        continue;
      const Cost loss = lookup(ctx.neighbors->at(victim).loss_map, r);
      c.order_key = loss.value();
      acquisitions.push_back(std::move(c));
    }
  }

  std::vector<Candidate> out;
  out.reserve(acquisitions.size() + releases.size());
  if (cfg.loss_aware_targeting) {
    std::stable_sort(acquisitions.begin(), acquisitions.end(),
                     [](const Candidate& a, const Candidate& b) {
                       return std::tie(a.order_key, a.order_id) <
                              std::tie(b.order_key, b.order_id);
                     });
    out = std::move(acquisitions);
    out.insert(out.end(), releases.begin(), releases.end());
  } else {
    out = std::move(acquisitions);
    out.insert(out.end(), releases.begin(), releases.end());
    std::stable_sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) {
      return a.order_id < b.order_id;
    });
  }
  return out;
}

/// Plateau escapes: the k lowest free resources at once (overall and per
/// type), and swaps of one held resource for one free resource.
std::vector<Candidate> generate_compound(const SearchContext& ctx, const ResourceSet& claims,
                                         const std::vector<std::uint32_t>& owner) {
  const Topology& topo = *ctx.topology;
  std::vector<ResourceId> free_all;
  std::array<std::vector<ResourceId>, kResourceTypeCount> free_by_type;
  for (ResourceId r = 0; r < topo.resource_count(); ++r) {
    if (claims.contains(r) || owner[r] != kNoOwner || !tile_allowed(ctx, topo.tile_of(r)))
      continue;
    free_all.push_back(r);
    free_by_type[static_cast<std::size_t>(topo.type_of(r))].push_back(r);
  }
  std::vector<Candidate> out;
  auto blocks = [&](const std::vector<ResourceId>& pool) {
    for (std::size_t k = 2; k <= std::min(pool.size(), kMaxBlock); ++k) {
      Candidate c;
      c.add.assign(pool.begin(), pool.begin() + static_cast<long>(k));
      c.order_id = pool.front();
      out.push_back(std::move(c));
    }
  };
  blocks(free_all);
  for (const auto& pool : free_by_type)
    if (pool.size() < free_all.size()) blocks(pool);
  for (ResourceId held : claims)
    for (ResourceId r : free_all) {
      Candidate c;
      c.add = {r};
      c.remove = {held};
      c.order_id = r;
      out.push_back(std::move(c));
    }
  return out;
}

}  // namespace

LocalView merged_view(const SearchContext& ctx, const ResourceSet& claims) {
  LocalView view(ctx.topology->resource_count());
  for (const auto& [agent, info] : *ctx.neighbors)
    for (ResourceId r : info.claims)
      if (view[r].is_free()) view[r] = Cell::owner(agent);
  for (ResourceId r : claims) view[r] = Cell::owner(ctx.self);
  return view;
}

Score score_claims(const SearchContext& ctx, const ResourceSet& committed,
                   const ResourceSet& claims) {
  const Topology& topo = *ctx.topology;
  const LocalView view = merged_view(ctx, claims);
  const Evaluation own = evaluate(*ctx.constraint, view, ctx.self, topo, ctx.stats);
  const Evaluation migration = evaluate_migration(*ctx.old_assignment, claims, ctx.policy);

  const auto owner = neighbor_owners(ctx);
  std::int64_t conflicts = 0;
  double extra = 0.0;
  std::map<AgentId, int> taken_from;
  std::set<TileId> intruded_tiles;

  for (ResourceId r : claims) {
    if (owner[r] == kNoOwner) {
      if (!committed.contains(r)) intruded_tiles.insert(topo.tile_of(r));
      continue;
    }
    const AgentId holder = owner[r];
    const bool take = !committed.contains(r) && ctx.config.thinking_globally &&
                      is_partner(ctx, holder) && ++taken_from[holder] == 1;
    if (!take) {
      ++conflicts;
      continue;
    }
    const Cost loss = lookup(ctx.neighbors->at(holder).loss_map, r);
    if (loss.is_infinite())
      ++conflicts;
    else
      extra += loss.value();
  }

  for (TileId t : intruded_tiles) {
    for (const auto& [agent, info] : *ctx.neighbors) {
      auto it = info.intrusion_map.find(t);
      if (it == info.intrusion_map.end()) continue;
      if (it->second.is_infinite())
        ++conflicts;
      else
        extra += it->second.value();
    }
  }

  Score score;
  score.conflicts = conflicts;
  score.violations = own.violations + migration.violations;
  if (score.feasible()) score.cost = own.cost.value() + migration.cost.value() + extra;
  return score;
}

MoveResult find_best_move(const SearchContext& ctx, const ResourceSet& committed) {
  MoveResult result;
  result.proposal = committed;
  result.current = score_claims(ctx, committed, committed);
  result.best = result.current;

  const Score zero{};
  const HeuristicConfig& cfg = ctx.config;
  if (cfg.local_search_zero_cutoff && result.current == zero) return result;

  const auto owner = neighbor_owners(ctx);
  std::set<AgentId> victims;
  for (;;) {
    bool found = false;
    Score best_score;
    std::size_t best_tiles = 0;
    std::uint64_t best_ids = 0;
    ResourceSet best_claims;
    auto consider = [&](const std::vector<Candidate>& candidates) {
      for (const Candidate& c : candidates) {
        ResourceSet next = result.proposal;
        for (ResourceId r : c.remove) next.erase(r);
        next.insert(c.add.begin(), c.add.end());
        const Score s = score_claims(ctx, committed, next);
        const std::size_t tiles = occupied_tiles(*ctx.topology, next);
        const std::uint64_t ids = id_sum(next);
        if (!found || std::tie(s, tiles, ids) < std::tie(best_score, best_tiles, best_ids)) {
          found = true;
          best_score = s;
          best_tiles = tiles;
          best_ids = ids;
          best_claims = std::move(next);
        }
        if (cfg.local_search_zero_cutoff && s == zero) return;
      }
    };
    consider(generate(ctx, result.proposal, owner, victims));
    if (cfg.multi_variable_change && !result.best.feasible() &&
        !(found && best_score < result.best))
      consider(generate_compound(ctx, result.proposal, owner));

    if (!found || !(best_score < result.best)) break;
    for (ResourceId r : best_claims)
      if (!result.proposal.contains(r) && owner[r] != kNoOwner) {
        victims.insert(owner[r]);
        result.takes[r] = owner[r];
      }
    for (auto it = result.takes.begin(); it != result.takes.end();)
      it = best_claims.contains(it->first) ? std::next(it) : result.takes.erase(it);
    result.proposal = std::move(best_claims);
    result.best = best_score;
    if (!cfg.multi_variable_change) break;
    if (cfg.local_search_zero_cutoff && result.best == zero) break;
  }

  result.improvement = Improvement::between(result.current, result.best);
  return result;
}

std::map<ResourceId, Cost> compute_loss_map(const SearchContext& ctx,
                                            const ResourceSet& committed) {
  std::map<ResourceId, Cost> out;
  if (contains_tile_sharing(*ctx.constraint)) {
    for (ResourceId r : committed) out[r] = Cost::infinity();
    return out;
  }
  const Topology& topo = *ctx.topology;
  auto own_cost = [&](const ResourceSet& claims, std::optional<ResourceId> vacated) {
    LocalView view = merged_view(ctx, claims);
    if (vacated && view[*vacated].is_free()) view[*vacated] = Cell::unknown();
    return eval_constraint(*ctx.constraint, view, ctx.self, topo, ctx.stats) +
           eval_migration(*ctx.old_assignment, claims, ctx.policy);
  };
  const Cost base = own_cost(committed, std::nullopt);
  for (ResourceId r : committed) {
    ResourceSet without = committed;
    without.erase(r);
    out[r] = own_cost(without, r).minus_clamped(base);
  }
  return out;
}

std::map<TileId, Cost> compute_intrusion_map(const SearchContext& ctx,
                                             const ResourceSet& committed) {
  std::map<TileId, Cost> out;
  if (!contains_tile_sharing(*ctx.constraint)) return out;
  for (ResourceId r : committed) out[ctx.topology->tile_of(r)] = Cost::infinity();
  return out;
}

std::vector<bool> tiles_within(const Topology& topology, const ResourceSet& held, int radius) {
  std::vector<bool> out(topology.tile_count(), false);
  std::set<TileId> held_tiles;
  for (ResourceId r : held) held_tiles.insert(topology.tile_of(r));
  for (TileId t = 0; t < topology.tile_count(); ++t)
    for (TileId h : held_tiles)
      if (topology.tile_distance(t, h) <= radius) {
        out[t] = true;
        break;
      }
  return out;
}

}  // namespace resmgm
