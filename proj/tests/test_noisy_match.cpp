#include <doctest.h>

#include <cmath>
#include <tuple>

#include "bitcap/errors.hpp"
#include "bitcap/noisy_match.hpp"
#include "oracles.hpp"

using namespace bitcap;

TEST_CASE("noise and flip conversions") {
  CHECK(flip_from_noise(0.05) == 0.025);
  CHECK(noise_from_flip(0.25) == 0.5);
}

TEST_CASE("model tables") {
  const auto m = MatchModel::build(2, 0.0);
  REQUIRE(m.log_w().size() == 2);
  CHECK(m.log_w()[0] == 0.0);
  CHECK(m.log_w()[1] == kNegInf);
  CHECK(m.log_a()[0] == doctest::Approx(std::log(0.75)));
  CHECK(m.log_a()[1] == doctest::Approx(std::log(0.25)));

  const auto one = MatchModel::build(1, 0.5);
  CHECK(std::exp(one.log_w()[0]) == doctest::Approx(0.5));
  CHECK(std::exp(one.log_a()[0]) == doctest::Approx(0.5));

  const auto m20 = MatchModel::build(20, 0.01);
  double s = 0.0;
  for (double lw : m20.log_w()) s += std::exp(lw);
  CHECK(std::abs(s - (1.0 - std::pow(0.01, 20))) < 1e-12);

  CHECK_THROWS_AS(MatchModel::build(0, 0.1), DomainError);
  CHECK_THROWS_AS(MatchModel::build(10, 0.51), DomainError);
  CHECK_THROWS_AS(MatchModel::build(10, -0.1), DomainError);
}

TEST_CASE("recognise one user") {
  SUBCASE("lone noiseless user") {
    CHECK(recognize_one_log(MatchModel::build(12, 0.0), 1).log() == 0.0);
  }
  SUBCASE("n = 1 follows the formula: 1 - p^k") {
    CHECK(recognize_one_log(MatchModel::build(4, 0.5), 1).log() ==
          doctest::Approx(std::log1p(-1.0 / 16)));
  }
  SUBCASE("exhaustive enumeration for n >= 2") {
    for (int k = 1; k <= 4; ++k) {
      for (double p : {0.0, 0.25, 0.5}) {
        for (int n = 2; n <= 3; ++n) {
          CAPTURE(k);
          CAPTURE(p);
          CAPTURE(n);
          const double expected = static_cast<double>(oracle::recognize_one(k, n, p));
          const double got = std::exp(recognize_one_log(MatchModel::build(k, p), n).log());
          CHECK(std::abs(got - expected) < 1e-12);
        }
      }
    }
  }
  SUBCASE("miss probability against the direct sum") {
    const auto m = MatchModel::build(30, 0.02);
    for (std::uint64_t n : {2ull, 17ull, 1000ull, 1000000ull}) {
      long double f = 0.0L;
      for (int d = 0; d < 30; ++d) {
        f += std::exp(static_cast<long double>(m.log_w()[d]) +
                      static_cast<long double>(n - 1) * m.log_a()[d]);
      }
      CHECK(m.miss_probability(n) == doctest::Approx(static_cast<double>(1.0L - f)).epsilon(1e-9));
    }
  }
  SUBCASE("small f goes through the direct sum") {
    const auto m = MatchModel::build(8, 0.2);
    const double lf = m.log_recognize(100000);
    CHECK(lf < std::log(0.5));
    CHECK(std::isfinite(lf));
  }
  CHECK_THROWS_AS(MatchModel::build(4, 0.1).miss_probability(0), DomainError);
}

TEST_CASE("accept-all product") {
  SUBCASE("reference row k=20, N=1000, noise 0.001") {
    const auto m = MatchModel::build(20, flip_from_noise(0.001));
    const double v = std::exp(accept_all_exact_log(m, 1000).log());
    CHECK(std::abs(v - 0.562) <= 0.001 + 1e-12);  // one unit in the last printed digit
  }
  SUBCASE("zero-noise closed form equals the product") {
    for (auto [k, n] : {std::pair{20, 1000ull}, {8, 30ull}, {33, 10000ull}, {64, 10000ull}}) {
      const double closed = accept_all_zero_noise_log(k, n).log();
      const double product = accept_all_exact_log(MatchModel::build(k, 0.0), n).log();
      CHECK(std::abs(closed - product) <= 1e-10 * std::max(1.0, std::abs(closed)));
    }
    // mpmath: 499500 * ln(1 - 2^-20)
    CHECK(std::exp(accept_all_zero_noise_log(20, 1000).log()) ==
          doctest::Approx(0.6210395271982944).epsilon(1e-12));
    CHECK(accept_all_zero_noise_log(20, 1).log() == 0.0);
  }
  CHECK(accept_all_exact_log(MatchModel::build(9, 0.0), 1).log() == 0.0);
  CHECK_THROWS_AS(accept_all_exact_log(MatchModel::build(200, 0.01), 10000000ull),
                  BudgetExceeded);
  CHECK_THROWS_AS(accept_all_zero_noise_log(0, 10), DomainError);
}

TEST_CASE("interval partitions") {
  const auto e = IntervalPartition::equal(1000, 100);
  CHECK(e.intervals() == 100);
  CHECK(e.cuts().front() == 1);
  CHECK(e.population() == 1000);
  for (std::size_t i = 1; i < e.cuts().size(); ++i) {
    const auto len = e.cuts()[i] - e.cuts()[i - 1];
    CHECK(len == 10);
  }
  CHECK(IntervalPartition::equal(5, 100).intervals() == 5);
  CHECK(IntervalPartition::equal(1, 3).intervals() == 1);
  CHECK(IntervalPartition::equal(1001, 100).population() == 1001);

  const auto g = IntervalPartition::geometric(10000000000ull, 4096);
  CHECK(g.population() == 10000000000ull);
  CHECK(g.intervals() > 3000);
  CHECK(IntervalPartition::default_for(100000000ull).intervals() > 100);
  CHECK(IntervalPartition::default_for(99999999ull).intervals() == 100);

  CHECK_THROWS_AS(IntervalPartition(std::vector<std::uint64_t>{2, 5}), DomainError);
  CHECK_THROWS_AS(IntervalPartition(std::vector<std::uint64_t>{1, 5, 5}), DomainError);
  CHECK_THROWS_AS(IntervalPartition(std::vector<std::uint64_t>{}), DomainError);
  CHECK_THROWS_AS(IntervalPartition(std::vector<std::uint64_t>{1}), DomainError);
  CHECK_THROWS_AS(IntervalPartition::equal(0, 10), DomainError);
}

TEST_CASE("bounds") {
  SUBCASE("sandwich with a trivial partition") {
    for (auto [k, n, p] : {std::tuple{10, 50ull, 0.01}, {16, 300ull, 0.1}, {6, 9ull, 0.25}}) {
      const auto m = MatchModel::build(k, p);
      const auto b = accept_all_bounds(m, n, IntervalPartition(std::vector<std::uint64_t>{1, n + 1}));
      const double exact = accept_all_exact_log(m, n).log();
      CHECK(b.low.log() <= exact);
      CHECK(b.high.log() >= exact);
    }
  }
  SUBCASE("reference row k=35, N=1e5, noise 0.01") {
    const auto m = MatchModel::build(35, flip_from_noise(0.01));
    const auto b = accept_all_bounds(m, 100000, IntervalPartition::equal(100000, 100));
    CHECK(std::abs(b.low.linear() - 0.0464) <= 0.0001 + 1e-12);
    CHECK(std::abs(b.high.linear() - 0.0493) <= 0.0001 + 1e-12);
  }
  SUBCASE("reference row k=150, N=1e4, noise 0.4") {
    const auto m = MatchModel::build(150, flip_from_noise(0.4));
    const auto b = accept_all_bounds(m, 10000, IntervalPartition::equal(10000, 100));
    CHECK(std::abs(b.low.linear() - 0.615) <= 0.001 + 1e-12);
    CHECK(std::abs(b.high.linear() - 0.621) <= 0.001 + 1e-12);
  }
  SUBCASE("zero probability propagates") {
    const auto m = MatchModel::build(1, 0.5);
    const auto b = accept_all_bounds(m, 50, IntervalPartition::equal(50, 5));
    CHECK(b.low.log() <= b.high.log());
    CHECK(std::isfinite(b.high.log()));
  }
  CHECK_THROWS_AS(accept_all_bounds(MatchModel::build(5, 0.1), 20, IntervalPartition(std::vector<std::uint64_t>{1, 10})),
                  DomainError);
}

TEST_CASE("min_k_for_accept") {
  SUBCASE("N = 2 against the exhaustive oracle") {
    // smallest k with P(all correct) >= 0.7
    int expected = 0;
    for (int k = 1; k <= 6 && expected == 0; ++k) {
      if (oracle::accept_all(k, 2, 0.0) >= 0.7L) expected = k;
    }
    CHECK(min_k_for_accept(2, 0.0, 0.3) == expected);
  }
  SUBCASE("noiseless 1e10 matches the birthday requirement") {
    const int k = min_k_for_accept(10000000000ull, 0.0, 1e-4);
    CHECK(k >= 78);
    CHECK(k <= 80);
  }
  SUBCASE("2^10 users") {
    const int k = min_k_for_accept(1024, 0.0, 1e-4);
    CHECK(std::abs(k - 33) <= 1);
  }
  SUBCASE("monotone in N and p") {
    int prev = 0;
    for (std::uint64_t n : {10ull, 1000ull, 100000ull, 10000000ull}) {
      const int k = min_k_for_accept(n, 0.05, 1e-2);
      CHECK(k >= prev);
      prev = k;
    }
    CHECK(min_k_for_accept(100000, 0.1, 1e-2) >= min_k_for_accept(100000, 0.05, 1e-2));
  }
  SUBCASE("start_k does not change the answer") {
    CHECK(min_k_for_accept(100000, 0.05, 1e-3, 1) == min_k_for_accept(100000, 0.05, 1e-3, 40));
  }
  SUBCASE("fully random probes never work") {
    CHECK_THROWS_AS(min_k_for_accept(1000, 0.5, 1e-2), Infeasible);
  }
  CHECK_THROWS_AS(min_k_for_accept(100, 0.1, 0.0), DomainError);
  CHECK_THROWS_AS(min_k_for_accept(0, 0.1, 0.1), DomainError);
}
