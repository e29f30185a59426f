#include "bitcap/birthday.hpp"

#include <cmath>
#include <string>

#include "bitcap/errors.hpp"

namespace bitcap::birthday {

namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw DomainError("alpha must lie in (0, 1)");
  }
}

void check_query(const BirthdayQuery& q) {
  if (!(q.patterns >= 1.0) || !std::isfinite(q.patterns)) {
    throw DomainError("pattern count T must be finite and >= 1");
  }
  if (q.population < 1) throw DomainError("population N must be >= 1");
}

}  // namespace

BirthdayQuery BirthdayQuery::from_bits(int k, std::uint64_t population) {
  if (k < 1 || k > 1023) throw DomainError("bit count must lie in [1, 1023]");
  return {std::ldexp(1.0, k), population};
}

LogProb no_collision_exact_log(BirthdayQuery q) {
  check_query(q);
  const auto n = q.population;
  if (static_cast<double>(n) > q.patterns) return LogProb::zero();
  if (n > kExactPopulationCap) {
    throw BudgetExceeded("exact birthday sum capped at N = " +
                         std::to_string(kExactPopulationCap) +
                         "; use the integral bounds");
  }
  // Neumaier summation of ln(1 - i/T).
  double sum = 0.0;
  double carry = 0.0;
  for (std::uint64_t i = 1; i < n; ++i) {
    const double term = std::log1p(-static_cast<double>(i) / q.patterns);
    const double t = sum + term;
    if (std::abs(sum) >= std::abs(term)) {
      carry += (sum - t) + term;
    } else {
      carry += (term - t) + sum;
    }
    sum = t;
  }
  return LogProb(sum + carry);
}

LogProb no_collision_lower_log(BirthdayQuery q) {
  check_query(q);
  const double t = q.patterns;
  const double n = static_cast<double>(q.population);
  if (!(t > n)) throw DomainError("lower bound requires T > N");
  // (T-N) ln(1 + N/(T-N)) - N == (T-N) * log1pmx(N/(T-N))
  return LogProb((t - n) * log1pmx(n / (t - n)));
}

LogProb no_collision_upper_log(BirthdayQuery q) {
  check_query(q);
  const double t = q.patterns;
  const double n = static_cast<double>(q.population);
  if (!(t >= n)) throw DomainError("upper bound requires T >= N");
  const double m = t - n + 1.0;
  // (T+1) ln((T+1)/m) - N ln(T/m) - N, with the linear parts cancelled.
  return LogProb((t + 1.0) * log1pmx(n / m) - n * log1pmx((n - 1.0) / m) +
                 n / m);
}

BoundGap bound_gap_delta(BirthdayQuery q) {
  check_query(q);
  const double t = q.patterns;
  const double n = static_cast<double>(q.population);
  if (!(t > n - 1.0)) throw DomainError("gap requires T > N - 1");
  BoundGap gap;
  gap.first_order = n / (t - n + 1.0);
  gap.exact = (t > n)
                  ? no_collision_upper_log(q).log() - no_collision_lower_log(q).log()
                  : std::numeric_limits<double>::infinity();
  return gap;
}

double min_ratio_x(std::uint64_t population, double alpha) {
  check_alpha(alpha);
  return -static_cast<double>(population) / (2.0 * std::log1p(-alpha)) + 1.0;
}

int min_bits(std::uint64_t population, double alpha) {
  check_alpha(alpha);
  if (population < 1) throw DomainError("population N must be >= 1");
  const double rhs =
      2.0 * std::log2(static_cast<double>(population)) - 1.0 - std::log2(alpha);
  // strict inequality: an exact integer right-hand side moves up by one
  const int k = static_cast<int>(std::floor(rhs)) + 1;
  return k < 1 ? 1 : k;
}

double db_size_gib(std::uint64_t population, int k) {
  if (k < 1) throw DomainError("bit count must be positive");
  return static_cast<double>(population) * k / 8.0 / 1073741824.0;
}

CapacityReport capacity_report(std::uint64_t population, double alpha) {
  CapacityReport report;
  report.alpha = alpha;
  report.x = min_ratio_x(population, alpha);
  report.k_min = min_bits(population, alpha);
  report.delta_gap =
      bound_gap_delta(BirthdayQuery::from_bits(report.k_min, population)).exact;
  return report;
}

}  // namespace bitcap::birthday
