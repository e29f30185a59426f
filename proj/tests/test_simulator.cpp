#include <doctest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <vector>

#include "bitcap/errors.hpp"
#include "bitcap/noisy_match.hpp"
#include "bitcap/open_world.hpp"
#include "bitcap/prob.hpp"
#include "bitcap/simulator.hpp"

using namespace bitcap;
using namespace bitcap::sim;

namespace {

bool within(const RateEstimate& e, double expected, double sigmas = 3.0) {
  const double se = std::max(e.std_error(), 1.0 / static_cast<double>(e.total));
  return std::abs(e.rate() - expected) <= sigmas * se;
}

}  // namespace

TEST_CASE("templates") {
  Template t(70);
  CHECK(t.words().size() == 2);
  CHECK(t.tail_mask() == (std::uint64_t{1} << 6) - 1);
  t.set(69, true);
  CHECK(t.get(69));
  t.flip(69);
  CHECK_FALSE(t.get(69));
  CHECK(Template(64).tail_mask() == ~std::uint64_t{0});
  CHECK_THROWS_AS(Template(0), DomainError);

  Rng rng = make_stream(5, 0);
  const auto a = random_template(70, rng);
  CHECK(hamming_distance(a, a) == 0);
  CHECK((a.words()[1] & ~a.tail_mask()) == 0);
  auto b = a;
  b.flip(3);
  b.flip(68);
  CHECK(hamming_distance(a, b) == 2);
  CHECK_THROWS_AS(hamming_distance(a, Template(71)), DomainError);
}

TEST_CASE("gen_population") {
  const auto pop = gen_population(64, 10000, 42);
  REQUIRE(pop.size() == 10000);
  CHECK(pop == gen_population(64, 10000, 42));
  CHECK_FALSE(pop == gen_population(64, 10000, 43));

  SUBCASE("fair bits") {
    double ones = 0.0;
    for (const auto& t : pop) ones += std::popcount(t.words()[0]);
    const double n = 64.0 * 10000.0;
    CHECK(std::abs(ones / n - 0.5) <= 4.0 * std::sqrt(0.25 / n));
  }
  SUBCASE("pairwise distances are Binomial(64, 1/2)") {
    // disjoint pairs keep the samples independent
    std::vector<double> counts(65, 0.0);
    for (std::size_t i = 0; i + 1 < pop.size(); i += 2) {
      counts[hamming_distance(pop[i], pop[i + 1])] += 1.0;
    }
    const double pairs = pop.size() / 2.0;
    // pool tails so every expected count is at least 5
    std::vector<double> obs, expct;
    double o_acc = 0.0, e_acc = 0.0;
    for (int d = 0; d <= 64; ++d) {
      o_acc += counts[d];
      e_acc += pairs * std::exp(binomial_pmf_log({64, 0.5}, d).log());
      if (e_acc >= 5.0 && (64 - d) > 0) {
        double rest = 0.0;
        for (int r = d + 1; r <= 64; ++r) rest += pairs * std::exp(binomial_pmf_log({64, 0.5}, r).log());
        if (rest < 5.0) continue;
        obs.push_back(o_acc);
        expct.push_back(e_acc);
        o_acc = e_acc = 0.0;
      }
    }
    obs.push_back(o_acc);
    expct.push_back(e_acc);
    double chi2 = 0.0;
    for (std::size_t i = 0; i < obs.size(); ++i) {
      chi2 += (obs[i] - expct[i]) * (obs[i] - expct[i]) / expct[i];
    }
    const boost::math::chi_squared dist(static_cast<double>(obs.size() - 1));
    CHECK(chi2 < boost::math::quantile(boost::math::complement(dist, 0.001)));
  }
}

TEST_CASE("perturb") {
  Rng rng = make_stream(9, 1);
  const auto t = random_template(64, rng);
  CHECK(perturb(t, 0.0, rng) == t);
  CHECK_THROWS_AS(perturb(t, 0.6, rng), DomainError);

  SUBCASE("mean distance 6.4 at p = 0.1") {
    const int reps = 100000;
    double sum = 0.0;
    for (int i = 0; i < reps; ++i) sum += hamming_distance(t, perturb(t, 0.1, rng));
    const double sigma = std::sqrt(64 * 0.1 * 0.9 / reps);
    CHECK(std::abs(sum / reps - 6.4) <= 4.0 * sigma);
  }
  SUBCASE("p = 0.5 randomises fully") {
    const int reps = 20000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < reps; ++i) {
      const double d = hamming_distance(t, perturb(t, 0.5, rng));
      sum += d;
      sq += d * d;
    }
    const double mean = sum / reps;
    CHECK(std::abs(mean - 32.0) <= 4.0 * std::sqrt(16.0 / reps));
    CHECK(sq / reps - mean * mean == doctest::Approx(16.0).epsilon(0.1));
  }
  SUBCASE("odd lengths keep the tail clear") {
    const auto t70 = random_template(70, rng);
    for (double p : {0.3, 0.5}) {
      const auto q = perturb(t70, p, rng);
      CHECK((q.words()[1] & ~q.tail_mask()) == 0);
    }
  }
}

TEST_CASE("identify") {
  auto db = gen_population(32, 50, 7);
  const auto hit = identify(db[17], db);
  REQUIRE(hit.index.has_value());
  CHECK(*hit.index == 17);
  CHECK_FALSE(hit.tie);
  CHECK(hit.distance == 0);

  Rng rng = make_stream(3, 3);
  const auto far = random_template(32, rng);
  CHECK(identify(far, db, 32).index.has_value());
  const auto none = identify(far, db, -1);
  CHECK_FALSE(none.index.has_value());

  // two templates one bit away on either side
  Template probe(8), a(8), b(8);
  a.set(0, true);
  b.set(1, true);
  const std::vector<Template> pair{a, b};
  const auto tie = identify(probe, pair);
  CHECK(tie.tie);
  CHECK(tie.distance == 1);
  CHECK_THROWS_AS(identify(probe, std::span<const Template>{}), DomainError);
}

TEST_CASE("accept-all estimates") {
  SUBCASE("single noiseless user") {
    const auto r = estimate_accept_all({16, 1, 0, 0.0, std::nullopt, 100, 1, 1});
    CHECK(r.accept_all.rate() == 1.0);
  }
  SUBCASE("noiseless k=20, N=1000 against the closed form") {
    SimConfig cfg{20, 1000, 0, 0.0, std::nullopt, 1000, 2024, 1};
    const auto r = estimate_accept_all(cfg);
    CHECK(within(r.accept_all, std::exp(accept_all_zero_noise_log(20, 1000).log())));
    CHECK(r.generator == kGeneratorName);
  }
  SUBCASE("same result on any number of threads") {
    SimConfig cfg{24, 200, 0, 0.02, std::nullopt, 300, 77, 1};
    const auto one = estimate_accept_all(cfg);
    cfg.threads = 4;
    const auto four = estimate_accept_all(cfg);
    CHECK(one.accept_all.events == four.accept_all.events);
    CHECK(one.correct.events == four.correct.events);
    CHECK(one.confused.events == four.confused.events);
  }
  SUBCASE("config validation") {
    CHECK_THROWS_AS(estimate_accept_all({0, 10, 0, 0.1, std::nullopt, 10, 1, 1}), DomainError);
    CHECK_THROWS_AS(estimate_accept_all({8, 10, 0, 0.7, std::nullopt, 10, 1, 1}), DomainError);
    CHECK_THROWS_AS(estimate_accept_all({8, 10, 0, 0.1, std::nullopt, 0, 1, 1}), DomainError);
    CHECK_THROWS_AS(estimate_open_world({8, 10, 0, 0.1, std::nullopt, 10, 1, 1}), DomainError);
  }
}

TEST_CASE("open-world estimates") {
  SUBCASE("noiseless probes are never rejected") {
    const auto r = estimate_open_world({32, 100, 10, 0.0, 0, 50, 5, 1});
    CHECK(r.rejected.events == 0);
  }
  SUBCASE("thr = k accepts every outsider") {
    const auto r = estimate_open_world({16, 20, 100, 0.1, 16, 20, 5, 1});
    CHECK(r.false_positive.rate() == 1.0);
    CHECK(r.rejected.events == 0);
  }
  SUBCASE("k=16, thr=2, N=100, p=0.05 against the formulas") {
    const SimConfig cfg{16, 100, 1000, 0.05, 2, 2000, 11, 2};
    const auto r = estimate_open_world(cfg);
    const OpenWorldModel m{16, 0.05, 100, 1000};
    CHECK(within(r.rejected, std::exp(fnir_n_log(m, 2).log())));
    CHECK(within(r.confused_within, std::exp(fnir_i_log(m, 2).log())));
    CHECK(within(r.confused, std::exp(fnir_i_total_log(m, 2).log())));
    CHECK(within(r.false_positive, std::exp(fpir_log(m, 2).log())));
    const double correct = 1.0 - r.rejected.rate() - r.confused.rate();
    CHECK(r.correct.rate() == doctest::Approx(correct).epsilon(1e-12));
  }
}
