#pragma once

// Log-space probability primitives. Every probability handled by the toolkit
// travels as its natural logarithm; linear values appear only at the edges.

#include <compare>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace bitcap {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// A probability stored as ln(P). -inf encodes P = 0.
class LogProb {
 public:
  constexpr LogProb() = default;
  constexpr explicit LogProb(double log_value) : value_(log_value) {}

  static constexpr LogProb one() { return LogProb(0.0); }
  static constexpr LogProb zero() { return LogProb(kNegInf); }
  static LogProb from_linear(double p);

  constexpr double log() const { return value_; }
  double linear() const { return std::exp(value_); }
  // 1 - P, accurate when P is close to 1.
  double complement() const { return -std::expm1(value_); }
  // ln(1 - P).
  double log_complement() const;

  constexpr bool is_zero() const { return value_ == kNegInf; }

  friend constexpr LogProb operator*(LogProb a, LogProb b) {
    return LogProb(a.value_ + b.value_);
  }
  friend constexpr auto operator<=>(LogProb, LogProb) = default;

 private:
  double value_ = 0.0;
};

/// Binomial(k, q) distribution of a count of differing bits.
struct BinomialSpec {
  int k = 1;
  double q = 0.5;
};

// ln C(k, d); throws DomainError when d is outside [0, k].
double log_binomial_coeff(int k, int d);

LogProb binomial_pmf_log(BinomialSpec spec, int d);

// ln P(D > d). d = -1 gives probability 1, d = k gives 0. Exact summation,
// taking the complement only when the lower tail is the small one.
LogProb binomial_tail_gt_log(BinomialSpec spec, int d);

// ln P(D = d) for d = 0..k.
std::vector<double> binomial_log_pmf_table(BinomialSpec spec);

// ln P(D > d) for d = 0..k in O(k).
std::vector<double> binomial_log_tail_gt_table(BinomialSpec spec);

double log_sum_exp(std::span<const double> terms);
double log_add_exp(double a, double b);

// ln(1 - e^x) for x <= 0.
double log1mexp(double x);
// ln(1 + x) - x, accurate for small |x|.
double log1pmx(double x);

// Upper tail P(Y > z) of the standard normal.
double normal_tail(double z);
double normal_log_tail(double z);

// z with P(Y > z) = q. Throws DomainError outside (0, 1).
double normal_tail_inverse(double q);
// Same, taking ln q; usable for q far below the smallest double.
double normal_tail_inverse_log(double log_q);

}  // namespace bitcap
