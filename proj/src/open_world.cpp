#include "bitcap/open_world.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "bitcap/errors.hpp"
#include "bitcap/noisy_match.hpp"

namespace bitcap {

namespace {

void check_model(const OpenWorldModel& m) {
  if (m.k < 1) throw DomainError("template length k must be positive");
  if (!(m.p >= 0.0 && m.p <= 0.5)) {
    throw DomainError("flip probability p must lie in [0, 0.5]");
  }
  if (m.enrolled < 1) throw DomainError("enrolled population N must be >= 1");
}

void check_thr(const OpenWorldModel& m, int thr) {
  if (thr < 0 || thr > m.k) {
    throw DomainError("threshold " + std::to_string(thr) + " outside [0, k]");
  }
}

void check_rate(double r, const char* name) {
  if (!(r > 0.0 && r < 1.0)) throw DomainError(std::string(name) + " must lie in (0, 1)");
}

// count * log_value with 0 * -inf = 0 (an empty product).
double scaled(double count, double log_value) {
  return count == 0.0 ? 0.0 : count * log_value;
}

// ln(1 - P(D > d; 1/2)^count): some of `count` impostors within d bits.
double log_any_within(double count, double log_tail_half) {
  const double none = scaled(count, log_tail_half);
  if (none == 0.0) return kNegInf;
  return log1mexp(none);
}

}  // namespace

LogProb fnir_n_log(const OpenWorldModel& m, int thr) {
  check_model(m);
  check_thr(m, thr);
  const double genuine = binomial_tail_gt_log({m.k, m.p}, thr).log();
  const double impostors = binomial_tail_gt_log({m.k, 0.5}, thr).log();
  if (genuine == kNegInf) return LogProb::zero();
  return LogProb(genuine + scaled(static_cast<double>(m.enrolled - 1), impostors));
}

LogProb fnir_i_log(const OpenWorldModel& m, int thr) {
  check_model(m);
  check_thr(m, thr);
  if (thr == 0 || m.enrolled == 1) return LogProb::zero();
  const auto pmf = binomial_log_pmf_table({m.k, m.p});
  const auto tail = binomial_log_tail_gt_table({m.k, 0.5});
  const double others = static_cast<double>(m.enrolled - 1);
  std::vector<double> terms;
  terms.reserve(thr);
  for (int d = 1; d <= thr; ++d) {
    terms.push_back(pmf[d] + log_any_within(others, tail[d]));
  }
  return LogProb(log_sum_exp(terms));
}

LogProb fnir_i_total_log(const OpenWorldModel& m, int thr) {
  check_model(m);
  check_thr(m, thr);
  if (m.enrolled == 1) return LogProb::zero();
  const auto pmf = binomial_log_pmf_table({m.k, m.p});
  const auto tail = binomial_log_tail_gt_table({m.k, 0.5});
  const double others = static_cast<double>(m.enrolled - 1);
  std::vector<double> terms;
  terms.reserve(thr + 2);
  for (int d = 0; d <= thr; ++d) {
    terms.push_back(pmf[d] + log_any_within(others, tail[d]));
  }
  // Genuine template outside the threshold, an impostor inside it.
  if (thr < m.k) {
    terms.push_back(binomial_tail_gt_log({m.k, m.p}, thr).log() +
                    log_any_within(others, tail[thr]));
  }
  return LogProb(log_sum_exp(terms));
}

LogProb fnir_i_infinity_log(const OpenWorldModel& m) { return fnir_i_log(m, m.k); }

LogProb fpir_log(const OpenWorldModel& m, int thr) {
  check_model(m);
  check_thr(m, thr);
  const double tail = binomial_tail_gt_log({m.k, 0.5}, thr).log();
  return LogProb(log_any_within(static_cast<double>(m.enrolled), tail));
}

LogProb fpir_aggregate_log(const OpenWorldModel& m, int thr) {
  check_model(m);
  check_thr(m, thr);
  if (m.unenrolled == 0) return LogProb::zero();
  // (1 - FPIR)^(N^-) = P(D > thr; 1/2)^(N N^-)
  const double tail = binomial_tail_gt_log({m.k, 0.5}, thr).log();
  const double pairs =
      static_cast<double>(m.enrolled) * static_cast<double>(m.unenrolled);
  return LogProb(log_any_within(pairs, tail));
}

std::optional<int> thr_for_fnir_n(int k, double p, double beta) {
  if (k < 1) throw DomainError("template length k must be positive");
  check_rate(beta, "beta");
  const auto tail = binomial_log_tail_gt_table({k, p});
  const double limit = std::log(beta);
  for (int thr = 0; thr < k; ++thr) {
    if (tail[thr] <= limit) return thr;
  }
  return std::nullopt;
}

double thr_normal_estimate(int k, std::uint64_t enrolled, std::uint64_t unenrolled,
                           double gamma) {
  check_rate(gamma, "gamma");
  const double log_q = std::log(gamma) - std::log(static_cast<double>(enrolled)) -
                       std::log(static_cast<double>(unenrolled));
  const double z = normal_tail_inverse_log(log_q);
  return k / 2.0 - z * std::sqrt(k / 4.0);
}

std::optional<int> thr_max_for_fpir(int k, std::uint64_t enrolled,
                                    std::uint64_t unenrolled, double gamma) {
  check_rate(gamma, "gamma");
  if (k < 1) throw DomainError("template length k must be positive");
  if (enrolled < 1) throw DomainError("enrolled population N must be >= 1");
  if (unenrolled == 0) return k - 1;

  const OpenWorldModel m{k, 0.0, enrolled, unenrolled};
  const double limit = std::log(gamma);
  auto ok = [&](int thr) { return fpir_aggregate_log(m, thr).log() <= limit; };

  // Strict bound: the largest integer below the estimate.
  const double estimate = thr_normal_estimate(k, enrolled, unenrolled, gamma);
  int thr = static_cast<int>(std::ceil(estimate)) - 1;
  thr = std::clamp(thr, 0, k - 1);

  while (thr >= 0 && !ok(thr)) --thr;
  if (thr < 0) return std::nullopt;
  while (thr + 1 <= k - 1 && ok(thr + 1)) ++thr;
  return thr;
}

ThresholdPlan plan_search(const ErrorBudget& budget, std::uint64_t enrolled,
                          std::uint64_t unenrolled, double p) {
  check_rate(budget.alpha, "alpha");
  check_rate(budget.beta, "beta");
  check_rate(budget.gamma, "gamma");
  if (enrolled < 1) throw DomainError("enrolled population N must be >= 1");

  ThresholdPlan plan;
  plan.k0 = min_k_for_accept(enrolled, p, budget.alpha);
  for (int k = plan.k0; k <= kMaxPlanBits; ++k) {
    const auto thr0 = thr_for_fnir_n(k, p, budget.beta);
    const auto thr1 = thr_max_for_fpir(k, enrolled, unenrolled, budget.gamma);
    if (thr0 && thr1 && *thr0 <= *thr1) {
      plan.k = k;
      plan.thr = *thr0;
      return plan;
    }
  }
  throw Infeasible("infeasible budgets: no plan with k <= " +
                   std::to_string(kMaxPlanBits));
}

}  // namespace bitcap
