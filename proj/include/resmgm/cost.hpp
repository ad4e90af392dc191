#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <string>

namespace resmgm {

/// Valued-constraint cost: a non-negative real or infinity (hard violation).
class Cost {
 public:
  constexpr Cost() = default;
  constexpr explicit Cost(double value) : value_(value) {}

  static constexpr Cost zero() { return Cost(0.0); }
  static constexpr Cost infinity() {
    return Cost(std::numeric_limits<double>::infinity());
  }

  constexpr double value() const { return value_; }
  constexpr bool is_infinite() const {
    return value_ == std::numeric_limits<double>::infinity();
  }
  constexpr bool is_finite() const { return !is_infinite(); }

  constexpr Cost& operator+=(Cost other) {
    value_ += other.value_;
    return *this;
  }
  friend constexpr Cost operator+(Cost a, Cost b) { return a += b; }

  friend constexpr bool operator==(Cost a, Cost b) = default;
  friend constexpr auto operator<=>(Cost a, Cost b) {
    return a.value_ <=> b.value_;
  }

  /// Difference `*this - other` clamped at zero. inf - finite = inf;
  /// inf - inf = 0.
  constexpr Cost minus_clamped(Cost other) const {
    if (is_infinite()) return other.is_infinite() ? zero() : infinity();
    if (other.is_infinite()) return zero();
    return value_ > other.value_ ? Cost(value_ - other.value_) : zero();
  }

  std::string to_string() const;

 private:
  double value_ = 0.0;
};

/// Cost with a measure of how far an infeasible state is from feasibility.
///
/// `violations` counts the violated units of the agent's own hard
/// constraints, `conflicts` counts harm to the rest of the system (double
/// claims and neighbours driven infeasible). A score is finite iff both
/// counters are zero, in which case `cost` carries the finite value.
struct Score {
  std::int64_t conflicts = 0;
  std::int64_t violations = 0;
  double cost = 0.0;

  bool feasible() const { return conflicts == 0 && violations == 0; }
  Cost as_cost() const { return feasible() ? Cost(cost) : Cost::infinity(); }

  friend bool operator==(const Score&, const Score&) = default;
  friend std::partial_ordering operator<=>(const Score& a, const Score& b) {
    if (a.conflicts != b.conflicts) return a.conflicts <=> b.conflicts;
    if (a.violations != b.violations) return a.violations <=> b.violations;
    return a.cost <=> b.cost;
  }
};

/// Extended improvement `before - after` of two scores, compared
/// lexicographically. A drop in either counter is an "infinite" improvement
/// that outranks every finite one; between two infeasible states of equal
/// counters the improvement is zero.
struct Improvement {
  std::int64_t conflicts = 0;
  std::int64_t violations = 0;
  double cost = 0.0;

  static Improvement between(const Score& before, const Score& after);

  bool positive() const { return *this > Improvement{}; }
  bool is_infinite() const { return conflicts != 0 || violations != 0; }

  friend bool operator==(const Improvement&, const Improvement&) = default;
  friend std::partial_ordering operator<=>(const Improvement& a,
                                               const Improvement& b) {
    if (a.conflicts != b.conflicts) return a.conflicts <=> b.conflicts;
    if (a.violations != b.violations) return a.violations <=> b.violations;
    return a.cost <=> b.cost;
  }

  std::string to_string() const;
};

}  // namespace resmgm
