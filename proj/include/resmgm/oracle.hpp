#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>

#include "resmgm/dcop.hpp"

namespace resmgm {

struct OracleLimits {
  std::size_t max_resources = 16;
  std::size_t max_agents = 4;
  std::uint64_t max_states = std::uint64_t{1} << 26;
};

class OracleGuardError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct OracleResult {
  Cost cost;
  /// First optimum in enumeration order (resource 0 most significant,
  /// FREE before agents in ascending id).
  Assignment witness;
  /// Number of enumerated states attaining `cost`.
  std::uint64_t optimum_count = 0;
  std::uint64_t states = 0;
};

/// Throws OracleGuardError if the oracle would refuse `scenario`.
void check_oracle_limits(const Scenario& scenario, bool movable_apriori,
                         const OracleLimits& limits = {});

/// Exhaustive minimum of allocation_cost over every owner function
/// resources -> enumerated agents + FREE. With movable_apriori = false only
/// the new agents are enumerated and a priori agents keep their initial
/// holding. Throws OracleGuardError beyond `limits`.
OracleResult brute_force_optimal_serial(const Scenario& scenario, bool movable_apriori,
                                        const OracleLimits& limits = {});

/// Same result as the serial version, enumeration split across OpenMP threads.
OracleResult brute_force_optimal(const Scenario& scenario, bool movable_apriori,
                                 const OracleLimits& limits = {});

}  // namespace resmgm
