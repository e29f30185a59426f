#include "bitcap/calibration.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "bitcap/birthday.hpp"
#include "bitcap/errors.hpp"
#include "bitcap/noisy_match.hpp"
#include "bitcap/parallel.hpp"

namespace bitcap::calibration {

InverseLine to_inverse(const LinearFit& fit) {
  if (fit.slope == 0.0) throw DomainError("zero slope has no inverse");
  return {1.0 / fit.slope, -fit.intercept / fit.slope};
}

LinearFit from_inverse(const InverseLine& line) {
  if (line.a == 0.0) throw DomainError("zero slope has no inverse");
  return {1.0 / line.a, -line.b / line.a, 0.0};
}

CubicPoly reference_slope_poly() { return {128.0, -40.2, 22.4, 2.17}; }
CubicPoly reference_intercept_poly() { return {580.0, -175.0, 99.8, 12.1}; }

std::vector<std::uint64_t> default_population_grid() {
  std::vector<std::uint64_t> grid;
  std::uint64_t n = 100;
  for (int e = 2; e <= 10; ++e, n *= 10) grid.push_back(n);
  return grid;
}

std::vector<double> default_noise_grid() {
  std::vector<double> grid;
  for (int i = 1; i <= 50; ++i) grid.push_back(i / 100.0);
  return grid;
}

std::vector<SweepRecord> sweep_k(double noise, double alpha,
                                 std::span<const std::uint64_t> populations) {
  if (populations.empty()) throw DomainError("population grid is empty");
  if (!std::is_sorted(populations.begin(), populations.end())) {
    throw DomainError("population grid must be ascending");
  }
  const double p = flip_from_noise(noise);
  std::vector<SweepRecord> records;
  records.reserve(populations.size());
  int previous = 1;
  for (std::uint64_t n : populations) {
    // k_min is non-decreasing in N, so the last answer is a valid start.
    const int k = min_k_for_accept(n, p, alpha, previous);
    records.push_back({noise, alpha, n, k});
    previous = k;
  }
  return records;
}

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DomainError("x and y differ in length");
  if (x.size() < 2) throw DomainError("a line fit needs at least two points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0) throw DomainError("degenerate fit: x has no variance");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (syy == 0.0) {
    fit.r2 = 1.0;
  } else {
    double sse = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = y[i] - fit.slope * x[i] - fit.intercept;
      sse += r * r;
    }
    fit.r2 = std::clamp(1.0 - sse / syy, 0.0, 1.0);
  }
  return fit;
}

LinearFit fit_linear(std::span<const SweepRecord> records) {
  if (records.size() < 3) throw DomainError("linear fit needs at least three records");
  for (const auto& r : records) {
    if (r.noise != records.front().noise || r.alpha != records.front().alpha) {
      throw DomainError("records mix noise levels or tolerances");
    }
  }
  std::vector<double> x, y;
  for (const auto& r : records) {
    x.push_back(std::log2(static_cast<double>(r.population)));
    y.push_back(r.k_min);
  }
  return fit_line(x, y);
}

std::vector<NoiseFit> collect_coefficients(std::span<const double> noise_grid,
                                           double alpha,
                                           std::span<const std::uint64_t> populations,
                                           unsigned threads) {
  if (noise_grid.empty()) throw DomainError("noise grid is empty");
  std::vector<NoiseFit> fits(noise_grid.size());
  parallel_for(noise_grid.size(), threads, [&](std::size_t i) {
    fits[i].noise = noise_grid[i];
    fits[i].records = sweep_k(noise_grid[i], alpha, populations);
    fits[i].fit = fit_linear(fits[i].records);
  });
  return fits;
}

CubicFit fit_cubic(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DomainError("x and y differ in length");
  if (x.size() < 4) throw DomainError("a cubic fit needs at least four points");
  const auto rows = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd design(rows, 4);
  Eigen::VectorXd rhs(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const double v = x[i];
    design(i, 0) = v * v * v;
    design(i, 1) = v * v;
    design(i, 2) = v;
    design(i, 3) = 1.0;
    rhs(i) = y[i];
  }
  const auto qr = design.colPivHouseholderQr();
  if (qr.rank() < 4) throw DomainError("rank-deficient cubic design");
  const Eigen::Vector4d c = qr.solve(rhs);
  CubicFit out;
  out.poly = {c(0), c(1), c(2), c(3)};
  double sse = 0.0;
  for (Eigen::Index i = 0; i < rows; ++i) {
    const double r = y[i] - out.poly(x[i]);
    sse += r * r;
  }
  out.mse = sse / static_cast<double>(rows);
  return out;
}

int predict_k(const CubicPoly& slope, const CubicPoly& intercept, double noise,
              std::uint64_t population) {
  if (population < 1) throw DomainError("population N must be >= 1");
  const double k =
      slope(noise) * std::log2(static_cast<double>(population)) + intercept(noise);
  return std::max(1, static_cast<int>(std::ceil(k)));
}

std::vector<DbRow> build_db_table(const CubicPoly& slope, const CubicPoly& intercept,
                                  std::span<const double> noise_list,
                                  std::uint64_t population) {
  if (population < 1) throw DomainError("population N must be >= 1");
  std::vector<DbRow> rows;
  rows.reserve(noise_list.size());
  for (double noise : noise_list) {
    DbRow row;
    row.noise = noise;
    row.slope = slope(noise);
    row.intercept = intercept(noise);
    row.k = predict_k(slope, intercept, noise, population);
    row.gib = birthday::db_size_gib(population, row.k);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace bitcap::calibration
