#pragma once

// Empirical scaling laws k = A(p) log2(N) + B(p).
//
// Throughout this module `noise` is the noise level: twice the per-bit flip
// probability (see flip_from_noise). The
// fitted polynomials A(p), B(p) take that noise level as their argument.

#include <cstdint>
#include <span>
#include <vector>

namespace bitcap::calibration {

struct SweepRecord {
  double noise = 0.0;
  double alpha = 0.0;
  std::uint64_t population = 0;
  int k_min = 0;
};

struct LinearFit {
  double slope = 0.0;      // A, bits per doubling of N
  double intercept = 0.0;  // B, bits
  double r2 = 0.0;

  double predict(double log2_population) const { return slope * log2_population + intercept; }
};

// Conversions between k = A log2 N + B and log2 N = a k + b.
struct InverseLine {
  double a = 0.0;
  double b = 0.0;
};
InverseLine to_inverse(const LinearFit& fit);
LinearFit from_inverse(const InverseLine& line);

struct CubicPoly {
  double c3 = 0.0, c2 = 0.0, c1 = 0.0, c0 = 0.0;

  double operator()(double x) const { return ((c3 * x + c2) * x + c1) * x + c0; }
};

struct CubicFit {
  CubicPoly poly;
  double mse = 0.0;
};

// Reference coefficient polynomials for alpha = 1e-4 (noise-level argument).
CubicPoly reference_slope_poly();
CubicPoly reference_intercept_poly();

// 10^2, 10^3, ..., 10^10.
std::vector<std::uint64_t> default_population_grid();
// 0.01, 0.02, ..., 0.50.
std::vector<double> default_noise_grid();

// Minimal k per population (ascending grid), one record each.
std::vector<SweepRecord> sweep_k(double noise, double alpha,
                                 std::span<const std::uint64_t> populations);

// Least squares of k on log2 N. Needs >= 3 records of one (noise, alpha).
LinearFit fit_linear(std::span<const SweepRecord> records);

// Plain least-squares line y = slope x + intercept with r^2.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

struct NoiseFit {
  double noise = 0.0;
  LinearFit fit;
  std::vector<SweepRecord> records;
};

// One sweep and fit per noise level, spread over `threads` workers.
std::vector<NoiseFit> collect_coefficients(std::span<const double> noise_grid,
                                           double alpha,
                                           std::span<const std::uint64_t> populations,
                                           unsigned threads = 1);

// Degree-3 least squares through (x, y); needs >= 4 distinct x.
CubicFit fit_cubic(std::span<const double> x, std::span<const double> y);

// ceil(A(p) log2 N + B(p)).
int predict_k(const CubicPoly& slope, const CubicPoly& intercept, double noise,
              std::uint64_t population);

struct DbRow {
  double noise = 0.0;
  double slope = 0.0;
  double intercept = 0.0;
  int k = 0;
  double gib = 0.0;
};

std::vector<DbRow> build_db_table(const CubicPoly& slope, const CubicPoly& intercept,
                                  std::span<const double> noise_list,
                                  std::uint64_t population);

}  // namespace bitcap::calibration
