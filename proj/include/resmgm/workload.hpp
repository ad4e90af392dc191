#pragma once

#include <cstdint>

#include "resmgm/dcop.hpp"

namespace resmgm {

/// Sampling ranges for multigrid-style request constraints.
struct ConstraintParams {
  /// PEQuantity bounds: min_pes from [min_pes_low, min_pes_high], max_pes
  /// from [max(min_pes, max_pes_low), max_pes_high].
  int min_pes_low = 2;
  int min_pes_high = 2;
  int max_pes_low = 4;
  int max_pes_high = 4;
  int parallelism_low = 2;
  int parallelism_high = 8;
  double sigma_low = 0.5;
  double sigma_high = 2.0;
  double tile_sharing_prob = 0.0;

  /// Throws std::invalid_argument on empty or out-of-range intervals.
  void validate() const;
  friend bool operator==(const ConstraintParams&, const ConstraintParams&) = default;
};

struct WorkloadParams {
  double apriori_load = 0.4;
  int num_apriori = 4;
  int max_res_per_agent = 4;
  /// Migration policy of every a priori agent.
  MigrationPolicy apriori_policy;
  ConstraintParams new_agent;
  friend bool operator==(const WorkloadParams&, const WorkloadParams&) = default;
};

/// And(PEQuantity(min, max), Downey(sigma, A)) plus TileSharing with
/// probability `tile_sharing_prob`.
ConstraintExpr generate_multigrid_constraint(const ConstraintParams& params, std::uint64_t seed);

/// floor(load * resources), robust to binary rounding of the load.
std::size_t preallocated_count(double load, std::size_t resources);

/// A priori agents 0..num_apriori-1 share exactly preallocated_count
/// distinct random resources, each holding 1..max_res_per_agent of them
/// under And(PEQuantity(n, n), [PEType(t) if single-typed], Downey). Agent
/// num_apriori is the new request. Throws std::invalid_argument if the load
/// cannot be split that way.
Scenario generate_scenario(const Topology& topology, const WorkloadParams& params,
                           std::uint64_t seed);

}  // namespace resmgm
