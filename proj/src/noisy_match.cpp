#include "bitcap/noisy_match.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bitcap/errors.hpp"

namespace bitcap {

namespace {

// Beyond this exponent a_d^(n-1) is below e^-50 and 1 - a_d^(n-1) rounds to 1.
constexpr double kNegligibleExponent = -50.0;

struct NeumaierSum {
  double sum = 0.0;
  double carry = 0.0;

  void add(double term) {
    const double t = sum + term;
    if (std::abs(sum) >= std::abs(term)) {
      carry += (sum - t) + term;
    } else {
      carry += (term - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + carry; }
};

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
}

}  // namespace

MatchModel MatchModel::build(int k, double p) {
  if (k < 1) throw DomainError("template length k must be positive");
  if (!(p >= 0.0 && p <= 0.5)) {
    throw DomainError("flip probability p must lie in [0, 0.5]");
  }
  MatchModel m;
  m.k_ = k;
  m.p_ = p;

  auto pmf = binomial_log_pmf_table({k, p});
  auto tail = binomial_log_tail_gt_table({k, 0.5});
  m.log_w_.assign(pmf.begin(), pmf.begin() + k);
  m.log_a_.assign(tail.begin(), tail.begin() + k);

  m.w_.resize(k);
  for (int d = 0; d < k; ++d) m.w_[d] = std::exp(m.log_w_[d]);
  m.w_suffix_.assign(k + 1, 0.0);
  for (int d = k - 1; d >= 0; --d) m.w_suffix_[d] = m.w_suffix_[d + 1] + m.w_[d];
  m.p_pow_k_ = (p == 0.0) ? 0.0 : std::exp(k * std::log(p));
  return m;
}

double MatchModel::miss_probability(std::uint64_t n) const {
  if (n < 1) throw DomainError("database size n must be >= 1");
  if (n == 1) return p_pow_k_;
  const double x = static_cast<double>(n - 1);

  // log_a is decreasing in d: past `cut`, a_d^(n-1) is negligible.
  const double limit = kNegligibleExponent / x;
  const auto cut_it = std::partition_point(
      log_a_.begin(), log_a_.end(), [limit](double la) { return la >= limit; });
  const auto cut = static_cast<std::size_t>(cut_it - log_a_.begin());

  double g = p_pow_k_ + w_suffix_[cut];
  for (std::size_t d = 0; d < cut; ++d) {
    if (w_[d] == 0.0) continue;
    g += w_[d] * -std::expm1(x * log_a_[d]);
  }
  return g;
}

double MatchModel::log_recognize(std::uint64_t n) const {
  const double g = miss_probability(n);
  if (g < 0.5) return std::log1p(-g);
  // f(n) is small: sum it directly.
  const double x = static_cast<double>(n - 1);
  std::vector<double> terms(k_);
  for (int d = 0; d < k_; ++d) terms[d] = log_w_[d] + x * log_a_[d];
  return log_sum_exp(terms);
}

IntervalPartition::IntervalPartition(std::vector<std::uint64_t> cuts)
    : cuts_(std::move(cuts)) {
  if (cuts_.size() < 2 || cuts_.front() != 1) {
    throw DomainError("partition must start at user 1 and hold one interval");
  }
  for (std::size_t i = 1; i < cuts_.size(); ++i) {
    if (cuts_[i] <= cuts_[i - 1]) {
      throw DomainError("partition cuts must be strictly increasing");
    }
  }
}

IntervalPartition IntervalPartition::equal(std::uint64_t population, int intervals) {
  if (population < 1 || intervals < 1) {
    throw DomainError("partition needs N >= 1 and at least one interval");
  }
  std::vector<std::uint64_t> cuts;
  cuts.reserve(intervals + 1);
  const long double n = static_cast<long double>(population);
  for (int i = 0; i <= intervals; ++i) {
    const auto c = 1 + static_cast<std::uint64_t>(std::llround(n * i / intervals));
    if (cuts.empty() || c > cuts.back()) cuts.push_back(c);
  }
  return IntervalPartition(std::move(cuts));
}

IntervalPartition IntervalPartition::geometric(std::uint64_t population,
                                               int intervals) {
  if (population < 1 || intervals < 1) {
    throw DomainError("partition needs N >= 1 and at least one interval");
  }
  const std::uint64_t end = population + 1;
  std::vector<std::uint64_t> cuts{1};
  const long double log_end = std::log(static_cast<long double>(end));
  for (int i = 1; i < intervals; ++i) {
    const auto c = static_cast<std::uint64_t>(std::llround(std::exp(log_end * i / intervals)));
    if (c > cuts.back() && c < end) cuts.push_back(c);
  }
  cuts.push_back(end);
  return IntervalPartition(std::move(cuts));
}

IntervalPartition IntervalPartition::default_for(std::uint64_t population) {
  if (population >= 100'000'000ULL) return geometric(population, 4096);
  return equal(population, 100);
}

LogProb recognize_one_log(const MatchModel& model, std::uint64_t n) {
  return LogProb(model.log_recognize(n));
}

LogProb accept_all_exact_log(const MatchModel& model, std::uint64_t population) {
  if (population < 1) throw DomainError("population N must be >= 1");
  if (static_cast<double>(population) * model.bits() > kExactWorkCap) {
    throw BudgetExceeded("exact accept-all product capped at N*k = 1e9 (N=" +
                         std::to_string(population) + ", k=" +
                         std::to_string(model.bits()) + "); use the bounds");
  }
  NeumaierSum total;
  for (std::uint64_t i = 1; i <= population; ++i) {
    const double term = model.log_recognize(i);
    if (term == kNegInf) return LogProb::zero();
    total.add(term);
  }
  return LogProb(total.value());
}

LogProb accept_all_zero_noise_log(int k, std::uint64_t population) {
  if (k < 1) throw DomainError("template length k must be positive");
  if (population < 1) throw DomainError("population N must be >= 1");
  const double n = static_cast<double>(population);
  const double pairs = 0.5 * n * (n - 1.0);
  if (pairs == 0.0) return LogProb::one();
  return LogProb(pairs * std::log1p(-std::ldexp(1.0, -k)));
}

BoundPair accept_all_bounds(const MatchModel& model, std::uint64_t population,
                            const IntervalPartition& part) {
  if (part.population() != population) {
    throw DomainError("partition does not cover users 1..N");
  }
  const auto cuts = part.cuts();
  NeumaierSum low;
  NeumaierSum high;
  bool low_zero = false;
  bool high_zero = false;
  double log_f_left = model.log_recognize(cuts[0]);
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double len = static_cast<double>(cuts[i + 1] - cuts[i]);
    const double log_f_right = model.log_recognize(cuts[i + 1]);
    if (log_f_right == kNegInf) low_zero = true;
    if (log_f_left == kNegInf) high_zero = true;
    if (!low_zero) low.add(len * log_f_right);
    if (!high_zero) high.add(len * log_f_left);
    log_f_left = log_f_right;
  }
  return {low_zero ? LogProb::zero() : LogProb(low.value()),
          high_zero ? LogProb::zero() : LogProb(high.value())};
}

BoundPair accept_all_bounds(const MatchModel& model, std::uint64_t population) {
  return accept_all_bounds(model, population, IntervalPartition::default_for(population));
}

int min_k_for_accept(std::uint64_t population, double p, double alpha, int start_k) {
  check_alpha(alpha);
  if (population < 1) throw DomainError("population N must be >= 1");
  if (start_k < 1) start_k = 1;
  const double target = std::log1p(-alpha);
  const auto part = IntervalPartition::default_for(population);
  // single-user blocks: the product itself is as cheap as the bound
  const bool exact = part.intervals() == population;
  auto passes = [&](int k) {
    const auto model = MatchModel::build(k, p);
    const LogProb v = exact ? accept_all_exact_log(model, population)
                            : accept_all_bounds(model, population, part).low;
    return v.log() >= target;
  };

  int lo = start_k - 1;  // assumed to fail
  int hi = start_k;
  int step = 1;
  while (!passes(hi)) {
    lo = hi;
    if (hi >= kMaxBits) {
      throw Infeasible("no template length up to " + std::to_string(kMaxBits) +
                       " bits reaches the accept-all target");
    }
    hi = std::min(hi + step, kMaxBits);
    step *= 2;
  }
  while (hi - lo > 1) {
    const int mid = lo + (hi - lo) / 2;
    if (passes(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

}  // namespace bitcap
