#include "resmgm/constraint.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace resmgm {

ConstraintExpr::ConstraintExpr() : node_(std::make_shared<const Node>(PEQuantity{})) {}

ConstraintExpr ConstraintExpr::from_node(Node node) {
  ConstraintExpr expr;
  expr.node_ = std::make_shared<const Node>(std::move(node));
  return expr;
}

bool operator==(const ConstraintExpr& a, const ConstraintExpr& b) {
  return a.node_ == b.node_ || *a.node_ == *b.node_;
}

ConstraintExpr pe_quantity(int min_pes, int max_pes) {
  if (min_pes < 0 || max_pes < 0)
    throw std::invalid_argument("pequantity bounds must be non-negative");
  if (min_pes > max_pes)
    throw std::invalid_argument("pequantity requires minPEs <= maxPEs (got " +
                                std::to_string(min_pes) + " > " +
                                std::to_string(max_pes) + ")");
  return ConstraintExpr::from_node(PEQuantity{min_pes, max_pes});
}

ConstraintExpr pe_type(ResourceType type) { return ConstraintExpr::from_node(PEType{type}); }

ConstraintExpr tile_sharing() { return ConstraintExpr::from_node(TileSharing{}); }

ConstraintExpr downey(double sigma, int avg_parallelism) {
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    throw std::invalid_argument("downey sigma must be positive");
  if (avg_parallelism <= 0)
    throw std::invalid_argument("downey average parallelism must be positive");
  return ConstraintExpr::from_node(Downey{sigma, avg_parallelism});
}

ConstraintExpr all_of(ConstraintExpr left, ConstraintExpr right) {
  return ConstraintExpr::from_node(
      Composite{Combinator::kAnd, std::move(left), std::move(right)});
}

ConstraintExpr any_of(ConstraintExpr left, ConstraintExpr right) {
  return ConstraintExpr::from_node(
      Composite{Combinator::kOr, std::move(left), std::move(right)});
}

ConstraintExpr union_of(ConstraintExpr left, ConstraintExpr right) {
  return ConstraintExpr::from_node(
      Composite{Combinator::kUnion, std::move(left), std::move(right)});
}

ConstraintExpr fold(Combinator op, std::span<const ConstraintExpr> children) {
  if (children.empty()) throw std::invalid_argument("fold needs at least one child");
  ConstraintExpr acc = children.front();
  for (std::size_t i = 1; i < children.size(); ++i)
    acc = ConstraintExpr::from_node(Composite{op, acc, children[i]});
  return acc;
}

std::size_t count_pe(const LocalView& view, AgentId agent) {
  return view.count_owned(agent);
}

double downey_speedup(double sigma, int avg_parallelism, int n) {
  if (!(sigma > 0.0)) throw std::invalid_argument("downey sigma must be positive");
  if (avg_parallelism <= 0)
    throw std::invalid_argument("downey average parallelism must be positive");
  if (n < 0) throw std::invalid_argument("downey: negative PE count");
  if (n == 0) return 0.0;
  if (n == 1) return 1.0;

  const double a = avg_parallelism;
  const double x = n;
  double s = a;
  if (sigma <= 1.0) {
    if (x <= a)
      s = a * x / (a + sigma * (x - 1.0) / 2.0);
    else if (x <= 2.0 * a - 1.0)
      s = a * x / (sigma * (a - 0.5) + x * (1.0 - sigma / 2.0));
  } else if (x <= a + a * sigma - sigma) {
    s = x * a * (sigma + 1.0) / (sigma * (x + a - 1.0) + a);
  }
  return std::min(s, a);
}

namespace {

struct Evaluator {
  const LocalView& view;
  AgentId agent;
  const Topology& topology;
  EvalStats* stats;

  void tick() const {
    if (stats) ++stats->leaf_evaluations;
  }

  Evaluation operator()(const PEQuantity& q) const {
    tick();
    const auto n = static_cast<std::int64_t>(view.count_owned(agent));
    if (n < q.min_pes) return {Cost::infinity(), q.min_pes - n};
    if (n > q.max_pes) return {Cost::infinity(), n - q.max_pes};
    return {Cost::zero(), 0};
  }

  Evaluation operator()(const PEType& t) const {
    tick();
    std::int64_t wrong = 0;
    for (ResourceId r = 0; r < view.size(); ++r)
      if (view[r].owned_by(agent) && topology.type_of(r) != t.type) ++wrong;
    return wrong == 0 ? Evaluation{Cost::zero(), 0} : Evaluation{Cost::infinity(), wrong};
  }

  Evaluation operator()(const TileSharing&) const {
    tick();
    std::int64_t foreign = 0;
    for (TileId tile = 0; tile < topology.tile_count(); ++tile) {
      const auto& members = topology.resources_of_tile(tile);
      const bool occupied = std::any_of(members.begin(), members.end(), [&](ResourceId r) {
        return view[r].owned_by(agent);
      });
      if (!occupied) continue;
      for (ResourceId r : members) {
        const Cell c = view[r];
        // UNKNOWN counts as somebody else.
        if (!c.owned_by(agent) && !c.is_free()) ++foreign;
      }
    }
    return foreign == 0 ? Evaluation{Cost::zero(), 0} : Evaluation{Cost::infinity(), foreign};
  }

  Evaluation operator()(const Downey& d) const {
    tick();
    const auto n = static_cast<int>(view.count_owned(agent));
    const double s = downey_speedup(d.sigma, d.avg_parallelism, n);
    if (s == 0.0) return {Cost::infinity(), 1};
    return {Cost(1.0 / s), 0};
  }

  Evaluation operator()(const Composite& c) const {
    const Evaluation l = std::visit(*this, c.left.node());
    const Evaluation r = std::visit(*this, c.right.node());
    switch (c.op) {
      case Combinator::kAnd:
        return {std::max(l.cost, r.cost), l.violations + r.violations};
      case Combinator::kOr:
        return {std::min(l.cost, r.cost), std::min(l.violations, r.violations)};
      case Combinator::kUnion:
        return {l.cost + r.cost, l.violations + r.violations};
    }
    return {};
  }
};

}  // namespace

Evaluation evaluate(const ConstraintExpr& expr, const LocalView& view, AgentId agent,
                    const Topology& topology, EvalStats* stats) {
  return std::visit(Evaluator{view, agent, topology, stats}, expr.node());
}

Evaluation evaluate_migration(const ResourceSet& old_assignment,
                              const ResourceSet& new_assignment,
                              const MigrationPolicy& policy) {
  if (old_assignment == new_assignment) return {Cost::zero(), 0};
  std::int64_t vacated = 0;
  for (ResourceId r : old_assignment) vacated += new_assignment.contains(r) ? 0 : 1;
  if (!policy.movable) {
    std::int64_t gained = 0;
    for (ResourceId r : new_assignment) gained += old_assignment.contains(r) ? 0 : 1;
    return {Cost::infinity(), vacated + gained};
  }
  return {Cost(policy.per_resource_cost * static_cast<double>(vacated)), 0};
}

Cost eval_migration(const ResourceSet& old_assignment, const ResourceSet& new_assignment,
                    const MigrationPolicy& policy) {
  return evaluate_migration(old_assignment, new_assignment, policy).cost;
}

Cost eval_system(std::span<const std::pair<AgentId, LocalView>> views) {
  if (views.empty()) return Cost::zero();
  const std::size_t resources = views.front().second.size();
  for (ResourceId r = 0; r < resources; ++r) {
    bool claimed = false;
    AgentId first = 0;
    for (const auto& [agent, view] : views) {
      if (!view[r].owned_by(agent)) continue;
      if (claimed && agent != first) return Cost::infinity();
      claimed = true;
      first = agent;
    }
  }
  return Cost::zero();
}

std::array<bool, kResourceTypeCount> requested_types(const ConstraintExpr& expr) {
  using Types = std::array<bool, kResourceTypeCount>;
  struct Visitor {
    Types operator()(const PEType& t) const {
      Types out{};
      out[static_cast<std::size_t>(t.type)] = true;
      return out;
    }
    Types operator()(const Composite& c) const {
      const Types l = std::visit(*this, c.left.node());
      const Types r = std::visit(*this, c.right.node());
      Types out{};
      for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = c.op == Combinator::kAnd ? (l[i] && r[i]) : (l[i] || r[i]);
      return out;
    }
    Types operator()(const PEQuantity&) const { return all(); }
    Types operator()(const TileSharing&) const { return all(); }
    Types operator()(const Downey&) const { return all(); }
    static Types all() { return Types{true, true, true}; }
  };
  return std::visit(Visitor{}, expr.node());
}

bool contains_tile_sharing(const ConstraintExpr& expr) {
  struct Visitor {
    bool operator()(const TileSharing&) const { return true; }
    bool operator()(const Composite& c) const {
      return std::visit(*this, c.left.node()) || std::visit(*this, c.right.node());
    }
    bool operator()(const PEQuantity&) const { return false; }
    bool operator()(const PEType&) const { return false; }
    bool operator()(const Downey&) const { return false; }
  };
  return std::visit(Visitor{}, expr.node());
}

int min_demand(const ConstraintExpr& expr) {
  struct Visitor {
    int operator()(const PEQuantity& q) const { return q.min_pes; }
    int operator()(const Downey&) const { return 1; }
    int operator()(const Composite& c) const {
      const int l = std::visit(*this, c.left.node());
      const int r = std::visit(*this, c.right.node());
      return c.op == Combinator::kOr ? std::min(l, r) : std::max(l, r);
    }
    int operator()(const PEType&) const { return 0; }
    int operator()(const TileSharing&) const { return 0; }
  };
  return std::visit(Visitor{}, expr.node());
}

}  // namespace resmgm
