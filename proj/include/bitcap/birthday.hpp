#pragma once

// Zero-noise collision analysis: N users drawn uniformly among T patterns.

#include <cstdint>

#include "bitcap/prob.hpp"

namespace bitcap::birthday {

/// T patterns (a real, so 2^k for large k fits) and N users.
struct BirthdayQuery {
  double patterns = 365.0;
  std::uint64_t population = 1;

  static BirthdayQuery from_bits(int k, std::uint64_t population);
};

// Population cap for the O(N) exact sum.
inline constexpr std::uint64_t kExactPopulationCap = 10'000'000;

// ln P(no collision), summing ln(1 - i/T) for i < N. -inf when N > T.
// Throws BudgetExceeded above kExactPopulationCap.
LogProb no_collision_exact_log(BirthdayQuery q);

// Integral lower bound (T - N) ln(T / (T - N)) - N. Requires T > N.
LogProb no_collision_lower_log(BirthdayQuery q);

// Integral upper bound. Requires T >= N.
LogProb no_collision_upper_log(BirthdayQuery q);

struct BoundGap {
  double exact = 0.0;        // upper - lower, log scale
  double first_order = 0.0;  // N / (T - N + 1)
};
BoundGap bound_gap_delta(BirthdayQuery q);

// Smallest pattern-to-population ratio x = T/N keeping the collision
// probability below alpha (large-x approximation; not rounded).
double min_ratio_x(std::uint64_t population, double alpha);

// Least integer k with k > 2 log2(N) - 1 - log2(alpha).
int min_bits(std::uint64_t population, double alpha);

// N k-bit templates, in GiB (2^30 bytes).
double db_size_gib(std::uint64_t population, int k);

struct CapacityReport {
  double x = 0.0;
  int k_min = 0;
  double alpha = 0.0;
  double delta_gap = 0.0;  // exact bound gap at T = 2^k_min
};
CapacityReport capacity_report(std::uint64_t population, double alpha);

}  // namespace bitcap::birthday
