#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "resmgm/cost.hpp"
#include "resmgm/topology.hpp"
#include "resmgm/view.hpp"

namespace resmgm {

class ConstraintExpr;

struct PEQuantity {
  int min_pes = 0;
  int max_pes = 0;
  friend bool operator==(const PEQuantity&, const PEQuantity&) = default;
};

struct PEType {
  ResourceType type = ResourceType::kRegular;
  friend bool operator==(const PEType&, const PEType&) = default;
};

struct TileSharing {
  friend bool operator==(const TileSharing&, const TileSharing&) = default;
};

struct Downey {
  double sigma = 1.0;
  int avg_parallelism = 1;
  friend bool operator==(const Downey&, const Downey&) = default;
};

enum class Combinator : std::uint8_t { kAnd, kOr, kUnion };

struct Composite;

/// Immutable constraint tree. Copies share structure.
class ConstraintExpr {
 public:
  using Node = std::variant<PEQuantity, PEType, TileSharing, Downey, Composite>;

  /// PEQuantity(0, 0).
  ConstraintExpr();

  const Node& node() const;

  template <typename T>
  const T* as() const;

  friend bool operator==(const ConstraintExpr& a, const ConstraintExpr& b);

  static ConstraintExpr from_node(Node node);

 private:
  std::shared_ptr<const Node> node_;
};

struct Composite {
  Combinator op = Combinator::kAnd;
  ConstraintExpr left;
  ConstraintExpr right;
  friend bool operator==(const Composite&, const Composite&) = default;
};

inline const ConstraintExpr::Node& ConstraintExpr::node() const { return *node_; }

template <typename T>
const T* ConstraintExpr::as() const {
  return std::get_if<T>(node_.get());
}

// Leaf and combinator factories. Leaves validate their parameters and throw
// std::invalid_argument on malformed input.
ConstraintExpr pe_quantity(int min_pes, int max_pes);
ConstraintExpr pe_type(ResourceType type);
ConstraintExpr tile_sharing();
ConstraintExpr downey(double sigma, int avg_parallelism);
ConstraintExpr all_of(ConstraintExpr left, ConstraintExpr right);
ConstraintExpr any_of(ConstraintExpr left, ConstraintExpr right);
ConstraintExpr union_of(ConstraintExpr left, ConstraintExpr right);
/// Left fold of >= 1 children under `op`.
ConstraintExpr fold(Combinator op, std::span<const ConstraintExpr> children);

/// Counter for leaf evaluations; shared by all evaluators of one run.
struct EvalStats {
  std::uint64_t leaf_evaluations = 0;
};

/// Result of evaluating a constraint. `cost` follows the valued-constraint
/// semantics; `violations` is zero iff `cost` is finite and otherwise
/// measures how many units the view is away from satisfying the tree.
struct Evaluation {
  Cost cost;
  std::int64_t violations = 0;
};

/// Number of resources whose owner in `view` is `agent`.
std::size_t count_pe(const LocalView& view, AgentId agent);

/// Downey speedup S(n) for average parallelism A and variance parameter sigma.
/// Throws std::invalid_argument for non-positive sigma or A.
double downey_speedup(double sigma, int avg_parallelism, int n);

Evaluation evaluate(const ConstraintExpr& expr, const LocalView& view, AgentId agent,
                    const Topology& topology, EvalStats* stats = nullptr);

inline Cost eval_constraint(const ConstraintExpr& expr, const LocalView& view,
                            AgentId agent, const Topology& topology,
                            EvalStats* stats = nullptr) {
  return evaluate(expr, view, agent, topology, stats).cost;
}

struct MigrationPolicy {
  bool movable = true;
  double per_resource_cost = 1.0;
  friend bool operator==(const MigrationPolicy&, const MigrationPolicy&) = default;
};

/// Cost of moving from `old_assignment` to `new_assignment`.
Cost eval_migration(const ResourceSet& old_assignment, const ResourceSet& new_assignment,
                    const MigrationPolicy& policy);
/// Same, with the violation measure (|old xor new| when not movable).
Evaluation evaluate_migration(const ResourceSet& old_assignment,
                              const ResourceSet& new_assignment,
                              const MigrationPolicy& policy);

/// System consistency: infinity iff two distinct agents each claim the same
/// resource in their own views.
Cost eval_system(std::span<const std::pair<AgentId, LocalView>> views);

// Static analysis used by participant selection.

/// Resource types a finite-cost assignment may contain (sound superset).
std::array<bool, kResourceTypeCount> requested_types(const ConstraintExpr& expr);
bool contains_tile_sharing(const ConstraintExpr& expr);
/// Lower bound on the number of resources any finite-cost assignment holds.
int min_demand(const ConstraintExpr& expr);

// Text form: (pequantity INT INT) | (petype IDENT) | (tilesharing)
//          | (downey REAL INT) | (and e e+) | (or e e+) | (union e e+)

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line, int column);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

/// Throws ParseError on syntax errors and std::invalid_argument when a leaf
/// fails validation (e.g. minPEs > maxPEs).
ConstraintExpr parse_constraint(std::string_view text);
std::string serialize_constraint(const ConstraintExpr& expr);

}  // namespace resmgm
