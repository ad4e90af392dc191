#include "resmgm/oracle.hpp"

#include <omp.h>

#include <algorithm>
#include <limits>
#include <string>
#include <vector>

namespace resmgm {

namespace {

constexpr std::uint32_t kFreeOwner = 0;

/// Enumeration order and the fixed data of one scenario.
class Enumerator {
 public:
  Enumerator(const Scenario& scenario, bool movable_apriori, const OracleLimits& limits)
      : scenario_(&scenario), resources_(scenario.topology.resource_count()) {
    scenario.validate();
    for (const auto* a : scenario.all_agents()) {
      constraints_[a->id] = a->constraint;
      policies_[a->id] = a->policy;
      old_[a->id] = a->initial;
      if (movable_apriori || scenario.is_new(a->id))
        enumerated_.push_back(a->id);
      else
        frozen_[a->id] = a->initial;
    }
    std::sort(enumerated_.begin(), enumerated_.end());
    if (resources_ > limits.max_resources || enumerated_.size() > limits.max_agents)
      throw OracleGuardError("oracle limited to " + std::to_string(limits.max_resources) +
                             " resources and " + std::to_string(limits.max_agents) +
                             " enumerated agents; got " + std::to_string(resources_) +
                             " and " + std::to_string(enumerated_.size()));
    base_ = enumerated_.size() + 1;
    states_ = 1;
    for (std::size_t r = 0; r < resources_; ++r) {
      if (states_ > limits.max_states / base_)
        throw OracleGuardError("oracle state space exceeds " +
                               std::to_string(limits.max_states) + " states");
      states_ *= base_;
    }
  }

  std::uint64_t states() const { return states_; }

  /// Owner digits of state `index`; digit r is the owner of resource r.
  void decode(std::uint64_t index, std::vector<std::uint32_t>& digits) const {
    digits.assign(resources_, kFreeOwner);
    for (std::size_t r = resources_; r-- > 0;) {
      digits[r] = static_cast<std::uint32_t>(index % base_);
      index /= base_;
    }
  }

  /// Advances `digits` to the next state in enumeration order.
  void next(std::vector<std::uint32_t>& digits) const {
    for (std::size_t r = resources_; r-- > 0;) {
      if (++digits[r] < base_) return;
      digits[r] = 0;
    }
  }

  Assignment assignment(const std::vector<std::uint32_t>& digits) const {
    Assignment out = frozen_;
    for (AgentId a : enumerated_) out[a];
    for (std::size_t r = 0; r < resources_; ++r)
      if (digits[r] != kFreeOwner)
        out[enumerated_[digits[r] - 1]].insert(static_cast<ResourceId>(r));
    return out;
  }

  Cost cost(const std::vector<std::uint32_t>& digits) const {
    const AgentViews views = truth_views(resources_, assignment(digits));
    return global_cost(views, constraints_, old_, policies_, scenario_->topology);
  }

 private:
  const Scenario* scenario_;
  std::size_t resources_;
  std::vector<AgentId> enumerated_;
  Assignment frozen_;
  std::map<AgentId, ConstraintExpr> constraints_;
  std::map<AgentId, MigrationPolicy> policies_;
  Assignment old_;
  std::uint64_t base_ = 1;
  std::uint64_t states_ = 1;
};

struct Best {
  Cost cost = Cost::infinity();
  std::uint64_t first = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t count = 0;
  bool any = false;

  void offer(Cost c, std::uint64_t index) {
    if (!any || c < cost) {
      cost = c;
      first = index;
      count = 1;
      any = true;
    } else if (c == cost) {
      ++count;
      if (index < first) first = index;
    }
  }

  void merge(const Best& other) {
    if (!other.any) return;
    if (!any || other.cost < cost) {
      *this = other;
    } else if (other.cost == cost) {
      count += other.count;
      if (other.first < first) first = other.first;
    }
  }
};

Best scan(const Enumerator& e, std::uint64_t begin, std::uint64_t end) {
  Best best;
  if (begin >= end) return best;
  std::vector<std::uint32_t> digits;
  e.decode(begin, digits);
  for (std::uint64_t i = begin; i < end; ++i) {
    best.offer(e.cost(digits), i);
    e.next(digits);
  }
  return best;
}

OracleResult finish(const Enumerator& e, const Best& best) {
  OracleResult out;
  out.cost = best.cost;
  out.optimum_count = best.count;
  out.states = e.states();
  std::vector<std::uint32_t> digits;
  e.decode(best.first, digits);
  out.witness = e.assignment(digits);
  return out;
}

}  // namespace

void check_oracle_limits(const Scenario& scenario, bool movable_apriori,
                         const OracleLimits& limits) {
  const Enumerator e(scenario, movable_apriori, limits);
}

OracleResult brute_force_optimal_serial(const Scenario& scenario, bool movable_apriori,
                                        const OracleLimits& limits) {
  const Enumerator e(scenario, movable_apriori, limits);
  return finish(e, scan(e, 0, e.states()));
}

OracleResult brute_force_optimal(const Scenario& scenario, bool movable_apriori,
                                 const OracleLimits& limits) {
  const Enumerator e(scenario, movable_apriori, limits);
  const std::uint64_t total = e.states();
  Best best;
#pragma omp parallel
  {
    const auto threads = static_cast<std::uint64_t>(omp_get_num_threads());
    const auto me = static_cast<std::uint64_t>(omp_get_thread_num());
    const std::uint64_t chunk = (total + threads - 1) / threads;
    const std::uint64_t begin = std::min(total, me * chunk);
    const std::uint64_t end = std::min(total, begin + chunk);
    const Best local = scan(e, begin, end);
#pragma omp critical
    best.merge(local);
  }
  return finish(e, best);
}

}  // namespace resmgm
