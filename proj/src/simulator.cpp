#include "bitcap/simulator.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "bitcap/errors.hpp"
#include "bitcap/parallel.hpp"

namespace bitcap::sim {

namespace {

#if defined(__x86_64__) && defined(__GNUC__) && !defined(__clang__)
#define BITCAP_POPCNT_CLONES __attribute__((target_clones("popcnt", "default")))
#else
#define BITCAP_POPCNT_CLONES
#endif

// Flat template storage for the scan loops.
struct Bank {
  int k = 0;
  std::size_t stride = 0;
  std::uint64_t mask = 0;
  std::vector<std::uint64_t> words;

  Bank(int bits, std::size_t count)
      : k(bits),
        stride((static_cast<std::size_t>(bits) + 63) / 64),
        mask(bits % 64 == 0 ? ~std::uint64_t{0} : (std::uint64_t{1} << (bits % 64)) - 1),
        words(stride * count) {}

  const std::uint64_t* row(std::size_t i) const { return words.data() + i * stride; }
  std::uint64_t* row(std::size_t i) { return words.data() + i * stride; }
  std::size_t size() const { return stride == 0 ? 0 : words.size() / stride; }

  void fill_random(std::size_t i, Rng& rng) {
    auto* r = row(i);
    for (std::size_t w = 0; w < stride; ++w) r[w] = rng();
    r[stride - 1] &= mask;
  }
};

int distance(const std::uint64_t* a, const std::uint64_t* b, std::size_t stride) {
  int d = 0;
  for (std::size_t w = 0; w < stride; ++w) d += std::popcount(a[w] ^ b[w]);
  return d;
}

struct Scan {
  int min = std::numeric_limits<int>::max();
  std::size_t count = 0;
  std::size_t argmin = 0;
};

// Minimum distance from `probe` to rows [begin, end) of the bank.
BITCAP_POPCNT_CLONES void scan_range(const Bank& bank, const std::uint64_t* probe, std::size_t begin,
                std::size_t end, Scan& s) {
  if (bank.stride == 1) {
    const std::uint64_t p = probe[0];
    const std::uint64_t* w = bank.words.data();
    for (std::size_t j = begin; j < end; ++j) {
      const int d = std::popcount(p ^ w[j]);
      if (d < s.min) {
        s = {d, 1, j};
      } else if (d == s.min) {
        ++s.count;
      }
    }
    return;
  }
  for (std::size_t j = begin; j < end; ++j) {
    const int d = distance(probe, bank.row(j), bank.stride);
    if (d < s.min) {
      s = {d, 1, j};
    } else if (d == s.min) {
      ++s.count;
    }
  }
}

// Flips each of k bits with probability p; returns the number flipped.
int apply_flips(std::uint64_t* row, int k, double p, Rng& rng) {
  if (p <= 0.0) return 0;
  int flipped = 0;
  if (p == 0.5) {
    const std::size_t stride = (static_cast<std::size_t>(k) + 63) / 64;
    for (std::size_t w = 0; w < stride; ++w) {
      std::uint64_t noise = rng();
      if (w == stride - 1 && k % 64 != 0) noise &= (std::uint64_t{1} << (k % 64)) - 1;
      row[w] ^= noise;
      flipped += std::popcount(noise);
    }
    return flipped;
  }
  // Gaps between flipped positions are geometric.
  std::geometric_distribution<long long> gap(p);
  for (long long pos = gap(rng); pos < k; pos += 1 + gap(rng)) {
    row[pos >> 6] ^= std::uint64_t{1} << (pos & 63);
    ++flipped;
  }
  return flipped;
}

void check_config(const SimConfig& cfg) {
  if (cfg.k < 1) throw DomainError("template length k must be positive");
  if (cfg.enrolled < 1) throw DomainError("enrolled population must be >= 1");
  if (!(cfg.p >= 0.0 && cfg.p <= 0.5)) {
    throw DomainError("flip probability p must lie in [0, 0.5]");
  }
  if (cfg.trials < 1) throw DomainError("trials must be >= 1");
  if (cfg.thr && (*cfg.thr < 0 || *cfg.thr > cfg.k)) {
    throw DomainError("threshold outside [0, k]");
  }
}

struct TrialCounts {
  bool all_correct = true;
  std::uint64_t correct = 0, confused = 0, rejected = 0, confused_within = 0;
  std::uint64_t false_positive = 0;
};

TrialCounts run_trial(const SimConfig& cfg, std::uint64_t trial, bool open_world) {
  Rng rng = make_stream(cfg.seed, trial);
  const std::size_t n = cfg.enrolled;
  Bank bank(cfg.k, n);
  for (std::size_t i = 0; i < n; ++i) bank.fill_random(i, rng);

  const int thr = cfg.thr.value_or(cfg.k);
  TrialCounts c;
  std::vector<std::uint64_t> probe(bank.stride);
  for (std::size_t i = 0; i < n; ++i) {
    std::copy_n(bank.row(i), bank.stride, probe.data());
    const int genuine = apply_flips(probe.data(), cfg.k, cfg.p, rng);
    Scan others;
    scan_range(bank, probe.data(), 0, i, others);
    scan_range(bank, probe.data(), i + 1, n, others);
    const int nearest = std::min(genuine, others.min);
    if (open_world && nearest > thr) {
      ++c.rejected;
      c.all_correct = false;
    } else if (genuine < others.min) {
      ++c.correct;
    } else {
      ++c.confused;
      c.all_correct = false;
    }
    if (genuine >= 1 && genuine <= thr && others.min <= genuine) ++c.confused_within;
  }

  if (open_world) {
    for (std::uint64_t u = 0; u < cfg.unenrolled; ++u) {
      for (auto& w : probe) w = rng();
      probe.back() &= bank.mask;
      Scan all;
      scan_range(bank, probe.data(), 0, n, all);
      if (all.min <= thr) ++c.false_positive;
    }
  }
  return c;
}

SimResult run(const SimConfig& cfg, bool open_world) {
  std::vector<TrialCounts> per_trial(cfg.trials);
  parallel_for(cfg.trials, std::max(1u, cfg.threads), [&](std::size_t t) {
    per_trial[t] = run_trial(cfg, t, open_world);
  });

  SimResult r;
  r.trials = cfg.trials;
  const std::uint64_t probes = cfg.trials * cfg.enrolled;
  r.accept_all.total = cfg.trials;
  r.correct.total = r.confused.total = r.rejected.total = r.confused_within.total = probes;
  r.false_positive.total = cfg.trials * cfg.unenrolled;
  for (const auto& c : per_trial) {
    r.accept_all.events += c.all_correct ? 1 : 0;
    r.correct.events += c.correct;
    r.confused.events += c.confused;
    r.rejected.events += c.rejected;
    r.confused_within.events += c.confused_within;
    r.false_positive.events += c.false_positive;
  }
  return r;
}

}  // namespace

Rng make_stream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

Template::Template(int k) : k_(k) {
  if (k < 1) throw DomainError("template length k must be positive");
  words_.assign((static_cast<std::size_t>(k) + 63) / 64, 0);
}

void Template::set(int i, bool v) {
  const auto bit = std::uint64_t{1} << (i & 63);
  if (v) {
    words_[i >> 6] |= bit;
  } else {
    words_[i >> 6] &= ~bit;
  }
}

std::uint64_t Template::tail_mask() const {
  return k_ % 64 == 0 ? ~std::uint64_t{0} : (std::uint64_t{1} << (k_ % 64)) - 1;
}

int hamming_distance(const Template& a, const Template& b) {
  if (a.bits() != b.bits()) throw DomainError("templates differ in length");
  return distance(a.words().data(), b.words().data(), a.words().size());
}

Template random_template(int k, Rng& rng) {
  Template t(k);
  auto w = t.words();
  for (auto& word : w) word = rng();
  w.back() &= t.tail_mask();
  return t;
}

std::vector<Template> gen_population(int k, std::uint64_t count, std::uint64_t seed) {
  Rng rng = make_stream(seed, 0);
  std::vector<Template> out;
  out.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) out.push_back(random_template(k, rng));
  return out;
}

Template perturb(const Template& t, double p, Rng& rng) {
  if (!(p >= 0.0 && p <= 0.5)) throw DomainError("flip probability p must lie in [0, 0.5]");
  Template out = t;
  apply_flips(out.words().data(), t.bits(), p, rng);
  return out;
}

Decision identify(const Template& probe, std::span<const Template> db,
                  std::optional<int> thr) {
  if (db.empty()) throw DomainError("identification needs a non-empty database");
  Decision out;
  int best = std::numeric_limits<int>::max();
  std::size_t count = 0;
  std::size_t argmin = 0;
  for (std::size_t j = 0; j < db.size(); ++j) {
    const int d = hamming_distance(probe, db[j]);
    if (d < best) {
      best = d;
      count = 1;
      argmin = j;
    } else if (d == best) {
      ++count;
    }
  }
  out.distance = best;
  if (thr && best > *thr) return out;
  out.index = argmin;
  out.tie = count > 1;
  return out;
}

double RateEstimate::rate() const {
  return total == 0 ? 0.0 : static_cast<double>(events) / static_cast<double>(total);
}

double RateEstimate::std_error() const {
  if (total == 0) return 0.0;
  const double r = rate();
  return std::sqrt(r * (1.0 - r) / static_cast<double>(total));
}

SimResult estimate_accept_all(const SimConfig& cfg) {
  check_config(cfg);
  return run(cfg, false);
}

SimResult estimate_open_world(const SimConfig& cfg) {
  check_config(cfg);
  if (!cfg.thr) throw DomainError("open-world simulation needs a threshold");
  return run(cfg, true);
}

}  // namespace bitcap::sim
