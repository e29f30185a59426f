#include "bitcap/prob.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "bitcap/errors.hpp"

namespace bitcap {

namespace {

void check_range(int k, int d) {
  if (k < 0 || d < 0 || d > k) {
    throw DomainError("binomial index d=" + std::to_string(d) +
                      " outside [0, " + std::to_string(k) + "]");
  }
}

void check_spec(BinomialSpec spec) {
  if (spec.k < 1) throw DomainError("binomial length k must be positive");
  if (!(spec.q >= 0.0 && spec.q <= 1.0)) {
    throw DomainError("binomial probability q must lie in [0, 1]");
  }
}

double log_gamma(double x) {
  int sign = 0;
  return ::lgamma_r(x, &sign);  // reentrant; std::lgamma writes signgam
}

// d*ln(q) + (k-d)*ln(1-q) with the 0*ln(0) = 0 convention.
double log_power_part(BinomialSpec spec, int d) {
  double acc = 0.0;
  if (d > 0) acc += d * std::log(spec.q);
  if (spec.k - d > 0) acc += (spec.k - d) * std::log1p(-spec.q);
  return acc;
}

}  // namespace

LogProb LogProb::from_linear(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("probability outside [0, 1]");
  return LogProb(std::log(p));
}

double LogProb::log_complement() const { return log1mexp(value_); }

double log_binomial_coeff(int k, int d) {
  check_range(k, d);
  const int m = std::min(d, k - d);
  if (m == 0) return 0.0;
  if (m <= 32) {
    // Exact-ish product; small m keeps it well inside double range.
    double acc = 0.0;
    double buffer = 1.0;
    for (int i = 1; i <= m; ++i) {
      buffer *= static_cast<double>(k - m + i) / i;
      if (buffer > 1e280) {
        acc += std::log(buffer);
        buffer = 1.0;
      }
    }
    return acc + std::log(buffer);
  }
  return log_gamma(k + 1.0) - log_gamma(d + 1.0) - log_gamma(k - d + 1.0);
}

LogProb binomial_pmf_log(BinomialSpec spec, int d) {
  check_spec(spec);
  check_range(spec.k, d);
  if (spec.q == 0.0) return d == 0 ? LogProb::one() : LogProb::zero();
  if (spec.q == 1.0) return d == spec.k ? LogProb::one() : LogProb::zero();
  return LogProb(log_binomial_coeff(spec.k, d) + log_power_part(spec, d));
}

std::vector<double> binomial_log_pmf_table(BinomialSpec spec) {
  check_spec(spec);
  std::vector<double> table(static_cast<std::size_t>(spec.k) + 1);
  for (int d = 0; d <= spec.k; ++d) table[d] = binomial_pmf_log(spec, d).log();
  return table;
}

LogProb binomial_tail_gt_log(BinomialSpec spec, int d) {
  check_spec(spec);
  if (d < -1 || d > spec.k) {
    throw DomainError("tail index d=" + std::to_string(d) + " outside [-1, k]");
  }
  if (d == -1) return LogProb::one();
  if (d == spec.k) return LogProb::zero();

  const double mean = spec.k * spec.q;
  double acc = kNegInf;
  if (d + 1 > mean) {
    for (int i = d + 1; i <= spec.k; ++i) {
      acc = log_add_exp(acc, binomial_pmf_log(spec, i).log());
    }
    return LogProb(acc);
  }
  for (int i = 0; i <= d; ++i) {
    acc = log_add_exp(acc, binomial_pmf_log(spec, i).log());
  }
  return LogProb(log1mexp(acc));
}

std::vector<double> binomial_log_tail_gt_table(BinomialSpec spec) {
  const auto pmf = binomial_log_pmf_table(spec);
  const int k = spec.k;
  // lower[d] = ln P(D <= d), upper[d] = ln P(D >= d)
  std::vector<double> lower(k + 1), upper(k + 2, kNegInf);
  double acc = kNegInf;
  for (int d = 0; d <= k; ++d) {
    acc = log_add_exp(acc, pmf[d]);
    lower[d] = acc;
  }
  acc = kNegInf;
  for (int d = k; d >= 0; --d) {
    acc = log_add_exp(acc, pmf[d]);
    upper[d] = acc;
  }
  const double mean = k * spec.q;
  std::vector<double> tail(k + 1);
  for (int d = 0; d <= k; ++d) {
    tail[d] = (d + 1 > mean) ? upper[d + 1] : log1mexp(lower[d]);
  }
  tail[k] = kNegInf;
  return tail;
}

double log_add_exp(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == kNegInf) return a;
  return a + std::log1p(std::exp(b - a));
}

double log_sum_exp(std::span<const double> terms) {
  if (terms.empty()) throw DomainError("log_sum_exp of an empty sequence");
  const double top = *std::max_element(terms.begin(), terms.end());
  if (top == kNegInf) return kNegInf;
  if (std::isinf(top)) return top;
  double sum = 0.0;
  for (double t : terms) sum += std::exp(t - top);
  return top + std::log(sum);
}

double log1mexp(double x) {
  if (x > 0.0) throw DomainError("log1mexp requires x <= 0");
  // Maechler's split: expm1 near zero, log1p further out.
  if (x > -std::numbers::ln2) return std::log(-std::expm1(x));
  return std::log1p(-std::exp(x));
}

double log1pmx(double x) {
  if (std::abs(x) > 1e-2) return std::log1p(x) - x;
  // -x^2/2 + x^3/3 - ... ; 12 terms reach double precision for |x| <= 1e-2
  double term = x;
  double sum = 0.0;
  for (int n = 2; n <= 14; ++n) {
    term *= -x;
    sum += term / n;
  }
  return sum;
}

double normal_tail(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

double normal_log_tail(double z) {
  if (z < 0.0) return std::log1p(-normal_tail(-z));
  if (z < 35.0) return std::log(normal_tail(z));
  // Asymptotic expansion of the Mills ratio.
  const double inv2 = 1.0 / (z * z);
  const double series =
      1.0 - inv2 * (1.0 - 3.0 * inv2 * (1.0 - 5.0 * inv2 * (1.0 - 7.0 * inv2)));
  return -0.5 * z * z - std::log(z) - 0.5 * std::log(2.0 * std::numbers::pi) +
         std::log(series);
}

double normal_tail_inverse_log(double log_q) {
  if (!(log_q < 0.0)) throw DomainError("normal tail probability must be < 1");
  if (log_q == kNegInf) throw DomainError("normal tail probability must be > 0");

  if (log_q > -std::numbers::ln2) {
    // q > 1/2: reflect.
    return -normal_tail_inverse_log(log1mexp(log_q));
  }

  // Abramowitz & Stegun 26.2.23 start, then Newton on ln Q(z).
  const double t = std::sqrt(-2.0 * log_q);
  double z = t - (2.515517 + t * (0.802853 + t * 0.010328)) /
                     (1.0 + t * (1.432788 + t * (0.189269 + t * 0.001308)));
  const double log_sqrt_2pi = 0.5 * std::log(2.0 * std::numbers::pi);
  for (int iter = 0; iter < 100; ++iter) {
    const double lt = normal_log_tail(z);
    const double log_phi = -0.5 * z * z - log_sqrt_2pi;
    const double slope = -std::exp(log_phi - lt);  // d/dz ln Q(z)
    const double step = (lt - log_q) / slope;
    z -= step;
    if (std::abs(step) < 1e-14 * std::max(1.0, std::abs(z))) break;
  }
  return z;
}

double normal_tail_inverse(double q) {
  if (!(q > 0.0 && q < 1.0)) {
    throw DomainError("normal_tail_inverse requires q in (0, 1)");
  }
  return normal_tail_inverse_log(std::log(q));
}

}  // namespace bitcap
