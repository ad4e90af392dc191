#include "resmgm/cost.hpp"

#include <cstdio>

namespace resmgm {

std::string Cost::to_string() const {
  if (is_infinite()) return "inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value_);
  return buf;
}

Improvement Improvement::between(const Score& before, const Score& after) {
  Improvement out;
  out.conflicts = before.conflicts - after.conflicts;
  out.violations = before.violations - after.violations;
  if (before.feasible() && after.feasible()) out.cost = before.cost - after.cost;
  return out;
}

std::string Improvement::to_string() const {
  char buf[96];
  std::snprintf(buf, sizeof buf, "(%lld,%lld,%.17g)", static_cast<long long>(conflicts),
                static_cast<long long>(violations), cost);
  return buf;
}

}  // namespace resmgm
