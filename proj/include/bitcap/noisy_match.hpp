#pragma once

// Closed-world identification of N enrolled users under per-bit flip noise.
//
// A probe differs from its own template by D ~ Binomial(k, p) bits and from
// every other template by D ~ Binomial(k, 1/2). A user is recognised when
// the own template is strictly closer than all others (ties fail).

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "bitcap/prob.hpp"

namespace bitcap {

// A noise level counts re-drawn bits, half of which keep their value:
// flip probability = noise / 2.
constexpr double flip_from_noise(double noise) { return noise / 2.0; }
constexpr double noise_from_flip(double flip) { return 2.0 * flip; }

/// Immutable per-(k, p) weight tables.
///   log_w[d] = ln P(D = d; p)           for d = 0..k-1
///   log_a[d] = ln P(D > d; 1/2)         for d = 0..k-1
class MatchModel {
 public:
  // Throws DomainError for k < 1 or p outside [0, 0.5].
  static MatchModel build(int k, double p);

  int bits() const { return k_; }
  double flip() const { return p_; }
  std::span<const double> log_w() const { return log_w_; }
  std::span<const double> log_a() const { return log_a_; }

  // 1 - f(n), where f(n) is the probability that a user is recognised
  // among n enrolled templates. Accurate when f(n) is close to 1.
  double miss_probability(std::uint64_t n) const;
  // ln f(n).
  double log_recognize(std::uint64_t n) const;

 private:
  MatchModel() = default;

  int k_ = 0;
  double p_ = 0.0;
  std::vector<double> log_w_;
  std::vector<double> log_a_;
  std::vector<double> w_;         // exp(log_w)
  std::vector<double> w_suffix_;  // sum of w over [d, k-1]
  double p_pow_k_ = 0.0;
};

inline MatchModel build_model(int k, double p) { return MatchModel::build(k, p); }

/// Cut points 1 = n_0 < n_1 < ... < n_z = N + 1. Interval i holds the users
/// [n_i, n_{i+1}), so the intervals cover users 1..N exactly once.
class IntervalPartition {
 public:
  // Validates strict increase, first cut 1, at least one interval; throws
  // DomainError otherwise.
  explicit IntervalPartition(std::vector<std::uint64_t> cuts);

  // z intervals of N/z users each (sizes differ by at most one).
  static IntervalPartition equal(std::uint64_t population, int intervals);
  // Cuts spaced evenly in log(n).
  static IntervalPartition geometric(std::uint64_t population, int intervals);
  // 100 equal intervals below 10^8 users, 4096 geometric ones above.
  static IntervalPartition default_for(std::uint64_t population);

  std::span<const std::uint64_t> cuts() const { return cuts_; }
  std::uint64_t population() const { return cuts_.back() - 1; }
  std::size_t intervals() const { return cuts_.size() - 1; }

 private:
  std::vector<std::uint64_t> cuts_;
};

struct BoundPair {
  LogProb low;
  LogProb high;
};

// ln P(u; p, n) = ln sum_{d<k} w_d a_d^(n-1). n = 1 gives ln(1 - p^k).
LogProb recognize_one_log(const MatchModel& model, std::uint64_t n);

inline constexpr double kExactWorkCap = 1e9;  // N * k

// ln prod_{i=1..N} P(u; p, i). Throws BudgetExceeded when N*k > 1e9.
LogProb accept_all_exact_log(const MatchModel& model, std::uint64_t population);

// p = 0 closed form: (N^2 - N)/2 * ln(1 - 2^-k).
LogProb accept_all_zero_noise_log(int k, std::uint64_t population);

// Interval bounds on the accept-all product. f is decreasing, so the users
// of [n_i, n_{i+1}) are bounded by f(n_{i+1}) below and f(n_i) above.
BoundPair accept_all_bounds(const MatchModel& model, std::uint64_t population,
                            const IntervalPartition& part);
BoundPair accept_all_bounds(const MatchModel& model, std::uint64_t population);

// Largest template length searched before giving up.
inline constexpr int kMaxBits = 16384;

// Smallest k whose accept-all lower bound reaches ln(1 - alpha). Search
// doubles from `start_k` and then bisects. Throws Infeasible past kMaxBits.
int min_k_for_accept(std::uint64_t population, double p, double alpha,
                     int start_k = 1);

}  // namespace bitcap
