#pragma once

// Monte Carlo identification harness: random fair-bit templates, Bernoulli
// bit flips on probes, nearest-neighbour search by Hamming distance.
//
// Trial t draws from its own generator, seeded from (seed, t), so results do
// not depend on how trials are spread over threads.

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace bitcap::sim {

using Rng = std::mt19937_64;

inline constexpr const char* kGeneratorName = "mt19937_64/seed_seq(seed,stream)";

Rng make_stream(std::uint64_t seed, std::uint64_t stream);

/// k bits packed little-endian into 64-bit words; bits past k stay zero.
class Template {
 public:
  explicit Template(int k);

  int bits() const { return k_; }
  bool get(int i) const { return (words_[i >> 6] >> (i & 63)) & 1u; }
  void set(int i, bool v);
  void flip(int i) { words_[i >> 6] ^= std::uint64_t{1} << (i & 63); }

  std::span<const std::uint64_t> words() const { return words_; }
  std::span<std::uint64_t> words() { return words_; }
  std::uint64_t tail_mask() const;

  friend bool operator==(const Template&, const Template&) = default;

 private:
  int k_;
  std::vector<std::uint64_t> words_;
};

int hamming_distance(const Template& a, const Template& b);

Template random_template(int k, Rng& rng);
std::vector<Template> gen_population(int k, std::uint64_t count, std::uint64_t seed);

// Flips each bit independently with probability p in [0, 0.5].
Template perturb(const Template& t, double p, Rng& rng);

struct Decision {
  std::optional<std::size_t> index;  // empty on reject
  bool tie = false;                  // several templates share the minimum
  int distance = 0;                  // minimum distance found
};

// Closest template; with `thr`, rejects when the minimum exceeds it.
Decision identify(const Template& probe, std::span<const Template> db,
                  std::optional<int> thr = std::nullopt);

struct SimConfig {
  int k = 16;
  std::uint64_t enrolled = 100;
  std::uint64_t unenrolled = 0;
  double p = 0.0;
  std::optional<int> thr;
  std::uint64_t trials = 1000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

struct RateEstimate {
  std::uint64_t events = 0;
  std::uint64_t total = 0;

  double rate() const;
  double std_error() const;  // binomial sqrt(r (1 - r) / n)
};

struct SimResult {
  std::uint64_t trials = 0;
  RateEstimate accept_all;  // per trial: every enrolled probe correct
  RateEstimate correct;     // per enrolled probe
  RateEstimate confused;    // wrong identity or tie at the minimum
  RateEstimate rejected;    // nothing within the threshold
  // Genuine distance in [1, thr] with an impostor at least as close.
  RateEstimate confused_within;
  RateEstimate false_positive;  // per unenrolled probe
  std::string generator = kGeneratorName;
};

SimResult estimate_accept_all(const SimConfig& cfg);
SimResult estimate_open_world(const SimConfig& cfg);

}  // namespace bitcap::sim
