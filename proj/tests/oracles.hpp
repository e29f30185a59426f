#pragma once

// Independent reference computations for the tests. Nothing here calls into
// the library's probability code.

#include <bit>
#include <cmath>
#include <cstdint>
#include <vector>

namespace oracle {

// C(n, r) by Pascal's triangle in exact integers (n <= 62).
inline std::uint64_t choose(int n, int r) {
  if (r < 0 || r > n) return 0;
  std::vector<std::uint64_t> row(n + 1, 0);
  row[0] = 1;
  for (int i = 1; i <= n; ++i) {
    for (int j = i; j > 0; --j) row[j] += row[j - 1];
  }
  return row[r];
}

inline long double pmf(int k, double q, int d) {
  return static_cast<long double>(choose(k, d)) * std::pow(static_cast<long double>(q), d) *
         std::pow(1.0L - q, k - d);
}

// P(D > d) by summing the upper atoms.
inline long double tail_gt(int k, double q, int d) {
  long double s = 0.0L;
  for (int i = d + 1; i <= k; ++i) s += pmf(k, q, i);
  return s;
}

// prod_{i<N} (1 - i/T) in long double.
inline long double no_collision_product(long double T, std::uint64_t N) {
  long double prod = 1.0L;
  for (std::uint64_t i = 1; i < N; ++i) prod *= (1.0L - static_cast<long double>(i) / T);
  return prod;
}

inline long double flip_weight(int k, double p, std::uint64_t mask) {
  const int f = std::popcount(mask);
  return std::pow(static_cast<long double>(p), f) * std::pow(1.0L - p, k - f);
}

// Probability that user 0 is strictly closest among n users, enumerating
// every database and every flip pattern.
inline long double recognize_one(int k, int n, double p) {
  const std::uint64_t patterns = std::uint64_t{1} << k;
  const std::uint64_t dbs = std::uint64_t{1} << (k * n);
  long double total = 0.0L;
  for (std::uint64_t db = 0; db < dbs; ++db) {
    const std::uint64_t own = db & (patterns - 1);
    for (std::uint64_t f = 0; f < patterns; ++f) {
      const std::uint64_t probe = own ^ f;
      const int genuine = std::popcount(f);
      bool strict = true;
      for (int j = 1; j < n; ++j) {
        const std::uint64_t t = (db >> (k * j)) & (patterns - 1);
        if (std::popcount(probe ^ t) <= genuine) {
          strict = false;
          break;
        }
      }
      if (strict) total += flip_weight(k, p, f);
    }
  }
  return total / static_cast<long double>(dbs);
}

// Probability that all N users are strictly closest to their own template,
// each probed once with independent flips.
inline long double accept_all(int k, int N, double p) {
  const std::uint64_t patterns = std::uint64_t{1} << k;
  const std::uint64_t dbs = std::uint64_t{1} << (k * N);
  const std::uint64_t flips = std::uint64_t{1} << (k * N);
  long double total = 0.0L;
  std::vector<std::uint64_t> t(N);
  for (std::uint64_t db = 0; db < dbs; ++db) {
    for (int j = 0; j < N; ++j) t[j] = (db >> (k * j)) & (patterns - 1);
    for (std::uint64_t fl = 0; fl < flips; ++fl) {
      long double w = 1.0L;
      bool all = true;
      for (int i = 0; i < N && all; ++i) {
        const std::uint64_t f = (fl >> (k * i)) & (patterns - 1);
        const std::uint64_t probe = t[i] ^ f;
        const int genuine = std::popcount(f);
        for (int j = 0; j < N; ++j) {
          if (j != i && std::popcount(probe ^ t[j]) <= genuine) {
            all = false;
            break;
          }
        }
      }
      if (!all) continue;
      for (int i = 0; i < N; ++i) w *= flip_weight(k, p, (fl >> (k * i)) & (patterns - 1));
      total += w;
    }
  }
  return total / static_cast<long double>(dbs);
}

struct OpenWorldRates {
  long double reject = 0.0L;           // nothing within thr
  long double confused_formula = 0.0L; // genuine d in [1, thr], impostor <= d
  long double confused_total = 0.0L;   // decision returns the wrong identity
  long double false_positive = 0.0L;   // outsider within thr of someone
};

// Enrolled user 0 probed once among n users, outsider probed against the
// same n templates.
inline OpenWorldRates open_world(int k, int n, double p, int thr) {
  const std::uint64_t patterns = std::uint64_t{1} << k;
  const std::uint64_t dbs = std::uint64_t{1} << (k * n);
  OpenWorldRates r;
  for (std::uint64_t db = 0; db < dbs; ++db) {
    const std::uint64_t own = db & (patterns - 1);
    for (std::uint64_t f = 0; f < patterns; ++f) {
      const std::uint64_t probe = own ^ f;
      const int genuine = std::popcount(f);
      int imp = k + 1;
      for (int j = 1; j < n; ++j) {
        imp = std::min(imp, std::popcount(probe ^ ((db >> (k * j)) & (patterns - 1))));
      }
      const long double w = flip_weight(k, p, f);
      const int nearest = std::min(genuine, imp);
      if (nearest > thr) {
        r.reject += w;
      } else if (!(genuine < imp)) {
        r.confused_total += w;
      }
      if (genuine >= 1 && genuine <= thr && imp <= genuine) r.confused_formula += w;
    }
    for (std::uint64_t outsider = 0; outsider < patterns; ++outsider) {
      int best = k + 1;
      for (int j = 0; j < n; ++j) {
        best = std::min(best, std::popcount(outsider ^ ((db >> (k * j)) & (patterns - 1))));
      }
      if (best <= thr) r.false_positive += 1.0L / patterns;
    }
  }
  const long double scale = static_cast<long double>(dbs);
  r.reject /= scale;
  r.confused_formula /= scale;
  r.confused_total /= scale;
  r.false_positive /= scale;
  return r;
}

// Standard normal upper tail by composite Simpson on [z, z + 40].
inline double normal_tail_quadrature(double z) {
  const int n = 200000;
  const double a = z, b = z + 40.0, h = (b - a) / n;
  auto phi = [](double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); };
  double s = phi(a) + phi(b);
  for (int i = 1; i < n; ++i) s += phi(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

}  // namespace oracle
