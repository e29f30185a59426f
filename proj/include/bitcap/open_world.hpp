#pragma once

// Thresholded identification with unenrolled users. A probe is accepted when
// its closest template lies within `thr` bits.

#include <cstdint>
#include <optional>

#include "bitcap/prob.hpp"

namespace bitcap {

struct OpenWorldModel {
  int k = 1;
  double p = 0.0;               // flip probability
  std::uint64_t enrolled = 1;   // N
  std::uint64_t unenrolled = 0; // N^-
};

struct ErrorBudget {
  double alpha = 1e-4;  // closed-world accept-all tolerance
  double beta = 1e-2;   // FNIR_n cap
  double gamma = 1e-4;  // aggregate false-positive cap over N^- probes
};

struct ThresholdPlan {
  int k = 0;
  int thr = 0;
  int k0 = 0;  // closed-world requirement the search started from
};

// ln[P(D > thr; p) * P(D > thr; 1/2)^(N-1)]: nobody within the threshold.
LogProb fnir_n_log(const OpenWorldModel& m, int thr);

// ln sum_{d=1..thr} P(D = d; p) (1 - P(D > d; 1/2)^(N-1)): the genuine
// template is within the threshold but an impostor is at least as close.
LogProb fnir_i_log(const OpenWorldModel& m, int thr);

// Confusion under the full decision rule: the closest template is within
// the threshold and is not uniquely the genuine one. Adds the d = 0 term and
// the case where the genuine template falls outside the threshold.
LogProb fnir_i_total_log(const OpenWorldModel& m, int thr);

// fnir_i_log at thr = k; bounds fnir_i_log for every threshold.
LogProb fnir_i_infinity_log(const OpenWorldModel& m);

// ln[1 - P(D > thr; 1/2)^N]. Does not depend on p.
LogProb fpir_log(const OpenWorldModel& m, int thr);

// ln[1 - (1 - FPIR)^(N^-)]: at least one false positive among N^- probes.
LogProb fpir_aggregate_log(const OpenWorldModel& m, int thr);

// Smallest thr in [0, k-1] with P(D > thr; p) <= beta.
std::optional<int> thr_for_fnir_n(int k, double p, double beta);

// Largest thr in [0, k-1] keeping fpir_aggregate <= gamma. Starts from the
// normal-law estimate and settles with exact tails.
std::optional<int> thr_max_for_fpir(int k, std::uint64_t enrolled,
                                    std::uint64_t unenrolled, double gamma);

// Normal-law threshold estimate k/2 - z(gamma / (N N^-)) sqrt(k/4), before
// exact refinement. May be negative.
double thr_normal_estimate(int k, std::uint64_t enrolled, std::uint64_t unenrolled,
                           double gamma);

inline constexpr int kMaxPlanBits = 100'000;

// Starts from the closed-world requirement and grows k until the FNIR_n
// threshold fits under the FPIR threshold. Throws Infeasible.
ThresholdPlan plan_search(const ErrorBudget& budget, std::uint64_t enrolled,
                          std::uint64_t unenrolled, double p);

}  // namespace bitcap
