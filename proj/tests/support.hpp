#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "resmgm/dcop.hpp"
#include "resmgm/harness.hpp"

namespace resmgm::testing {

Topology regular_grid(int tiles_x, int tiles_y, int cores_per_tile);

/// Downey speedup written directly from the model's two regimes, in long
/// double, without sharing code with the library.
long double reference_speedup(long double sigma, long double a, long double n);

/// Random constraint over PEQuantity and PEType leaves joined by And / Or.
ConstraintExpr random_constraint(std::mt19937_64& rng, int depth);

/// Small instance: 1-2 tiles x 1-4 cores, up to two a priori agents whose
/// constraints hold on their holdings, one new agent, at least one free
/// resource.
Scenario small_instance(std::uint64_t seed);

/// 3 tiles x 4 cores (REGULAR, REGULAR, STREAM), `agents` agents in total,
/// the last of them new.
Scenario suite_scenario(int agents, std::uint64_t seed);

/// suite_scenario for 4..8 agents and seeds 0..19.
const std::vector<Scenario>& standard_suite();

/// Independent brute force: minimum of the objective over every owner
/// function of the new agents' resources, a priori holdings fixed, plus
/// the number of minimisers.
struct Reference {
  Cost cost = Cost::infinity();
  std::uint64_t count = 0;
};
Reference reference_optimum(const Scenario& scenario);

bool disjoint(const Assignment& assignment);

}  // namespace resmgm::testing
