#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "bitcap/bitcap.hpp"

namespace {

using nlohmann::ordered_json;
using namespace bitcap;

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kDomain = 3,
  kBudget = 4,
  kInfeasible = 5,
  kIo = 6,
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------- parsing

std::uint64_t parse_count(const std::string& text, const char* what) {
  if (text.empty()) throw UsageError(std::string(what) + ": empty value");
  if (std::all_of(text.begin(), text.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
      throw UsageError(std::string(what) + ": count out of range: " + text);
    }
    return v;
  }
  double d = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), d);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(d) || d < 0.0 ||
      d != std::floor(d) || d >= 18446744073709551616.0) {
    throw UsageError(std::string(what) + ": not a non-negative integer count: " + text);
  }
  return static_cast<std::uint64_t>(d);
}

double parse_real(const std::string& text, const char* what) {
  double d = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), d);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(d)) {
    throw UsageError(std::string(what) + ": not a number: " + text);
  }
  return d;
}

int parse_int(const std::string& text, const char* what) {
  const auto v = parse_count(text, what);
  if (v > 1'000'000'000ull) throw UsageError(std::string(what) + ": too large: " + text);
  return static_cast<int>(v);
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

// ---------------------------------------------------------------- tables

struct Cell {
  enum Kind { kEmpty, kInt, kReal, kText } kind = kEmpty;
  std::string text;

  static Cell empty() { return {}; }
  static Cell integer(long long v) { return {kInt, std::to_string(v)}; }
  static Cell real(double v) {
    if (std::isinf(v)) return {kText, v < 0 ? "-inf" : "inf"};
    return {kReal, fmt("%.6g", v == 0.0 ? 0.0 : v)};
  }
  static Cell str(std::string s) { return {kText, std::move(s)}; }
};

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  ordered_json extra = ordered_json::object();
};

std::string csv_field(const Cell& c) {
  if (c.kind != Cell::kText) return c.text;
  if (c.text.find_first_of(",\"\n") == std::string::npos) return c.text;
  std::string out = "\"";
  for (char ch : c.text) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

ordered_json json_value(const Cell& c) {
  switch (c.kind) {
    case Cell::kEmpty:
      return nullptr;
    case Cell::kInt:
      return std::stoll(c.text);
    case Cell::kReal:
      return std::stod(c.text);
    case Cell::kText:
      return c.text;
  }
  return nullptr;
}

// ---------------------------------------------------------------- run context

struct Common {
  std::string format = "csv";
  bool log = false;
  std::string threads;
  std::string out;
  std::string manifest;
};

// Every user-facing option binds to a string so the resolved value can be
// written back verbatim into the manifest.
struct OptionSet {
  std::vector<std::pair<std::string, std::string*>> scalars;
  std::vector<std::pair<std::string, std::vector<std::string>*>> lists;
  std::vector<std::pair<std::string, bool*>> flags;
};

struct Command {
  std::string name;
  CLI::App* app = nullptr;
  Common common;
  OptionSet opts;
  std::function<Table(Command&)> run;
  std::vector<std::uint64_t> seeds;

  unsigned threads() const {
    if (common.threads.empty()) return default_threads();
    const auto t = parse_count(common.threads, "--threads");
    if (t == 0) throw UsageError("--threads must be at least 1");
    return static_cast<unsigned>(std::min<std::uint64_t>(t, 1024));
  }
  std::string prob_cell_name(const std::string& base) const {
    return common.log ? "ln_" + base : base;
  }
  Cell prob(LogProb v) const { return Cell::real(common.log ? v.log() : v.linear()); }
  Cell prob_complement(LogProb v) const {
    return Cell::real(common.log ? v.log_complement() : v.complement());
  }

  ordered_json params() const {
    ordered_json p = ordered_json::object();
    for (const auto& [name, value] : opts.scalars) {
      if (!value->empty()) p[name] = *value;
    }
    for (const auto& [name, values] : opts.lists) {
      if (!values->empty()) p[name] = *values;
    }
    for (const auto& [name, flag] : opts.flags) {
      if (*flag) p[name] = true;
    }
    return p;
  }
};

void add_scalar(Command& c, const std::string& flags, const std::string& long_name,
                std::string& target, const std::string& help) {
  c.app->add_option(flags, target, help);
  c.opts.scalars.emplace_back(long_name, &target);
}

void add_list(Command& c, const std::string& flags, const std::string& long_name,
              std::vector<std::string>& target, const std::string& help) {
  c.app->add_option(flags, target, help)->delimiter(',');
  c.opts.lists.emplace_back(long_name, &target);
}

void add_flag(Command& c, const std::string& flags, const std::string& long_name, bool& target,
              const std::string& help) {
  c.app->add_flag(flags, target, help);
  c.opts.flags.emplace_back(long_name, &target);
}

void add_common(Command& c) {
  c.app->add_option("--format", c.common.format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}));
  c.opts.scalars.emplace_back("format", &c.common.format);
  add_flag(c, "--log", "log", c.common.log, "Print probabilities as natural logarithms");
  add_scalar(c, "--threads", "threads", c.common.threads,
             "Worker threads (default: BITCAP_THREADS or hardware)");
  c.app->add_option("-o,--out", c.common.out, "Write results to this file instead of stdout");
  c.app->add_option("--manifest", c.common.manifest, "Write a run manifest (JSON) here");
}

// Noise level (2 x flip) or raw flip probability; noise wins the default.
struct NoiseArgs {
  std::string noise;
  std::string flip;
};

void add_noise(Command& c, NoiseArgs& n, const std::string& default_noise) {
  n.noise = default_noise;
  auto* opt_noise = c.app->add_option("-p,--noise", n.noise,
                                      "Noise level in [0, 1]; bits flip with probability p/2");
  auto* opt_flip = c.app->add_option("--flip", n.flip, "Per-bit flip probability in [0, 0.5]");
  opt_noise->excludes(opt_flip);
  c.opts.scalars.emplace_back("noise", &n.noise);
  c.opts.scalars.emplace_back("flip", &n.flip);
}

double resolve_flip(Command& c, NoiseArgs& n) {
  if (c.app->get_option("--flip")->count() > 0 || !n.flip.empty()) {
    n.noise.clear();
    const double f = parse_real(n.flip, "--flip");
    if (f < 0.0 || f > 0.5) throw DomainError("flip probability must lie in [0, 0.5]");
    return f;
  }
  const double v = parse_real(n.noise, "--noise");
  if (v < 0.0 || v > 1.0) throw DomainError("noise level must lie in [0, 1]");
  return flip_from_noise(v);
}

// ---------------------------------------------------------------- commands

struct CollisionArgs {
  std::string days, bits, people, alpha = "1e-4";
};

Table run_collision(Command& c, CollisionArgs& a) {
  if (a.people.empty()) throw UsageError("--pop is required");
  if (!a.days.empty() && !a.bits.empty()) throw UsageError("give --days or --bits, not both");
  const auto n = parse_count(a.people, "--pop");
  const double alpha = parse_real(a.alpha, "--alpha");
  if (n < 1) throw DomainError("population must be at least 1");

  const auto cap = birthday::capacity_report(n, alpha);
  birthday::BirthdayQuery q{};
  q.population = n;
  if (!a.days.empty()) {
    q.patterns = parse_real(a.days, "--days");
  } else {
    const int k = a.bits.empty() ? cap.k_min : parse_int(a.bits, "--bits");
    q = birthday::BirthdayQuery::from_bits(k, n);
  }

  std::optional<LogProb> exact;
  if (n <= birthday::kExactPopulationCap) exact = birthday::no_collision_exact_log(q);
  const auto low = birthday::no_collision_lower_log(q);
  // the integral upper bound can exceed 1 for tiny N
  const auto high = LogProb(std::min(0.0, birthday::no_collision_upper_log(q).log()));
  const auto gap = birthday::bound_gap_delta(q);

  Table t;
  t.columns = {"T",
               "N",
               c.prob_cell_name("collision"),
               c.prob_cell_name("collision_low"),
               c.prob_cell_name("collision_high"),
               "delta",
               "delta_first_order",
               "alpha",
               "x_min",
               "k_min",
               "gib"};
  t.rows.push_back({Cell::real(q.patterns), Cell::integer(static_cast<long long>(n)),
                    exact ? c.prob_complement(*exact) : Cell::empty(), c.prob_complement(high),
                    c.prob_complement(low), Cell::real(gap.exact), Cell::real(gap.first_order),
                    Cell::real(alpha), Cell::real(cap.x), Cell::integer(cap.k_min),
                    Cell::real(birthday::db_size_gib(n, cap.k_min))});
  return t;
}

struct AcceptArgs {
  std::string k, pop, mode = "auto", intervals;
  NoiseArgs noise;
};

Table run_accept(Command& c, AcceptArgs& a) {
  if (a.k.empty() || a.pop.empty()) throw UsageError("-k and -N are required");
  const int k = parse_int(a.k, "-k");
  const auto n = parse_count(a.pop, "-N");
  const double flip = resolve_flip(c, a.noise);
  if (n < 1) throw DomainError("population must be at least 1");
  const auto model = MatchModel::build(k, flip);

  const bool tractable = static_cast<double>(n) * k <= kExactWorkCap;
  const bool want_exact = a.mode == "exact" || (a.mode == "auto" && tractable);
  const bool want_bounds = a.mode != "exact";

  std::optional<LogProb> truth;
  if (want_exact) truth = accept_all_exact_log(model, n);  // throws BudgetExceeded
  std::optional<BoundPair> bounds;
  if (want_bounds) {
    const auto part = a.intervals.empty()
                          ? IntervalPartition::default_for(n)
                          : IntervalPartition::equal(n, parse_int(a.intervals, "--intervals"));
    bounds = accept_all_bounds(model, n, part);
  }

  Cell delta = Cell::empty();
  if (bounds && truth && !truth->is_zero()) {
    delta = Cell::real((bounds->high.linear() - bounds->low.linear()) / (2.0 * truth->linear()));
  }

  Table t;
  t.columns = {"k",
               "N",
               "noise",
               "flip",
               c.prob_cell_name("v_low"),
               c.prob_cell_name("v_truth"),
               c.prob_cell_name("v_high"),
               "delta"};
  t.rows.push_back({Cell::integer(k), Cell::integer(static_cast<long long>(n)),
                    Cell::real(noise_from_flip(flip)), Cell::real(flip),
                    bounds ? c.prob(bounds->low) : Cell::empty(),
                    truth ? c.prob(*truth) : Cell::empty(),
                    bounds ? c.prob(bounds->high) : Cell::empty(), delta});
  return t;
}

struct PlanArgs {
  std::string pop = "1e10", unenrolled, alpha = "1e-4", beta = "1e-2", gamma = "1e-4";
  NoiseArgs noise;
};

Table run_plan(Command& c, PlanArgs& a) {
  const auto n = parse_count(a.pop, "--pop");
  const auto nm = a.unenrolled.empty() ? n : parse_count(a.unenrolled, "--unenrolled");
  const double flip = resolve_flip(c, a.noise);
  const ErrorBudget budget{parse_real(a.alpha, "--alpha"), parse_real(a.beta, "--beta"),
                           parse_real(a.gamma, "--gamma")};
  const auto plan = plan_search(budget, n, nm, flip);

  const OpenWorldModel m{plan.k, flip, n, nm};
  const auto accept = accept_all_bounds(MatchModel::build(plan.k, flip), n).low;
  Table t;
  t.columns = {"noise",
               "flip",
               "k0",
               "k",
               "thr",
               c.prob_cell_name("fnir_n"),
               c.prob_cell_name("fnir_i"),
               c.prob_cell_name("fpir"),
               c.prob_cell_name("fpir_aggregate"),
               c.prob_cell_name("accept_all_low")};
  t.rows.push_back({Cell::real(noise_from_flip(flip)), Cell::real(flip), Cell::integer(plan.k0),
                    Cell::integer(plan.k), Cell::integer(plan.thr), c.prob(fnir_n_log(m, plan.thr)),
                    c.prob(fnir_i_total_log(m, plan.thr)), c.prob(fpir_log(m, plan.thr)),
                    c.prob(fpir_aggregate_log(m, plan.thr)), c.prob(accept)});
  return t;
}

struct GridArgs {
  std::vector<std::string> noise;
  std::vector<std::string> pops;
  std::string alpha = "1e-4";
};

std::vector<double> noise_grid(const std::vector<std::string>& raw, std::vector<double> fallback,
                               const CLI::App* app) {
  if (app->get_option("--noise")->count() > 0 && raw.empty()) {
    throw UsageError("--noise grid is empty");
  }
  if (raw.empty()) return fallback;
  std::vector<double> out;
  for (const auto& s : raw) out.push_back(parse_real(s, "--noise"));
  return out;
}

std::vector<std::uint64_t> pop_grid(const std::vector<std::string>& raw, const CLI::App* app) {
  if (app->get_option("--pops")->count() > 0 && raw.empty()) {
    throw UsageError("--pops grid is empty");
  }
  if (raw.empty()) return calibration::default_population_grid();
  std::vector<std::uint64_t> out;
  for (const auto& s : raw) out.push_back(parse_count(s, "--pops"));
  return out;
}

void add_grid(Command& c, GridArgs& g) {
  add_list(c, "--noise", "noise", g.noise, "Noise levels (comma separated; default 0.01..0.50)");
  add_list(c, "--pops", "pops", g.pops, "Population sizes (default 1e2..1e10)");
  add_scalar(c, "--alpha", "alpha", g.alpha, "Accept-all tolerance");
}

std::vector<calibration::NoiseFit> run_grid(Command& c, GridArgs& g) {
  const auto noise = noise_grid(g.noise, calibration::default_noise_grid(), c.app);
  const auto pops = pop_grid(g.pops, c.app);
  for (double v : noise) {
    if (v < 0.0 || v > 1.0) throw DomainError("noise level must lie in [0, 1]");
  }
  const double alpha = parse_real(g.alpha, "--alpha");
  std::vector<std::vector<calibration::SweepRecord>> per(noise.size());
  parallel_for(noise.size(), c.threads(),
               [&](std::size_t i) { per[i] = calibration::sweep_k(noise[i], alpha, pops); });
  std::vector<calibration::NoiseFit> out;
  for (std::size_t i = 0; i < noise.size(); ++i) {
    calibration::NoiseFit f;
    f.noise = noise[i];
    f.records = std::move(per[i]);
    out.push_back(std::move(f));
  }
  return out;
}

Table sweep_table(const std::vector<calibration::SweepRecord>& records) {
  Table t;
  t.columns = {"p", "alpha", "N", "k_min"};
  for (const auto& r : records) {
    t.rows.push_back({Cell::real(r.noise), Cell::real(r.alpha),
                      Cell::integer(static_cast<long long>(r.population)), Cell::integer(r.k_min)});
  }
  return t;
}

Table run_sweep(Command& c, GridArgs& g) {
  std::vector<calibration::SweepRecord> all;
  for (const auto& f : run_grid(c, g)) all.insert(all.end(), f.records.begin(), f.records.end());
  return sweep_table(all);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  return out;
}

std::vector<calibration::NoiseFit> read_sweep_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  std::string line;
  std::getline(in, line);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "p,alpha,N,k_min") throw UsageError(path + ": expected header p,alpha,N,k_min");
  std::vector<calibration::NoiseFit> out;
  std::map<double, std::size_t> index;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 4) throw UsageError(path + ": malformed row: " + line);
    calibration::SweepRecord r{parse_real(f[0], "p"), parse_real(f[1], "alpha"),
                               parse_count(f[2], "N"), parse_int(f[3], "k_min")};
    auto [it, fresh] = index.emplace(r.noise, out.size());
    if (fresh) out.push_back({r.noise, {}, {}});
    out[it->second].records.push_back(r);
  }
  if (out.empty()) throw UsageError(path + ": no sweep rows");
  return out;
}

ordered_json poly_json(const calibration::CubicFit& f) {
  return {{"c3", f.poly.c3}, {"c2", f.poly.c2}, {"c1", f.poly.c1}, {"c0", f.poly.c0},
          {"mse", f.mse}};
}

struct FitArgs {
  GridArgs grid;
  std::string input;
  std::string summary;
};

Table run_fit(Command& c, FitArgs& a) {
  auto fits = a.input.empty() ? run_grid(c, a.grid) : read_sweep_csv(a.input);
  Table t;
  t.columns = {"p", "A", "B", "r2"};
  std::vector<double> x, ya, yb;
  ordered_json r2 = ordered_json::array();
  for (auto& f : fits) {
    f.fit = calibration::fit_linear(f.records);
    t.rows.push_back({Cell::real(f.noise), Cell::real(f.fit.slope), Cell::real(f.fit.intercept),
                      Cell::real(f.fit.r2)});
    x.push_back(f.noise);
    ya.push_back(f.fit.slope);
    yb.push_back(f.fit.intercept);
    r2.push_back({{"p", f.noise}, {"r2", f.fit.r2}});
  }
  if (x.size() >= 4) {
    const auto fa = calibration::fit_cubic(x, ya);
    const auto fb = calibration::fit_cubic(x, yb);
    t.extra["A"] = poly_json(fa);
    t.extra["B"] = poly_json(fb);
  }
  t.extra["r2"] = r2;
  if (!a.summary.empty()) {
    std::ofstream out(a.summary);
    if (!out) throw IoError("cannot write " + a.summary);
    out << t.extra.dump(2) << '\n';
    if (!out) throw IoError("write failed: " + a.summary);
  }
  return t;
}

calibration::CubicPoly poly_from_json(const ordered_json& j) {
  return {j.at("c3").get<double>(), j.at("c2").get<double>(), j.at("c1").get<double>(),
          j.at("c0").get<double>()};
}

struct DbArgs {
  std::string pop = "1e10";
  std::vector<std::string> noise;
  std::string coeffs;
};

Table run_dbtable(Command& c, DbArgs& a) {
  std::vector<double> fallback;
  for (int i = 0; i <= 10; ++i) fallback.push_back(i * 0.05);
  const auto noise = noise_grid(a.noise, fallback, c.app);
  const auto n = parse_count(a.pop, "--pop");

  auto slope = calibration::reference_slope_poly();
  auto intercept = calibration::reference_intercept_poly();
  if (!a.coeffs.empty()) {
    std::ifstream in(a.coeffs);
    if (!in) throw IoError("cannot read " + a.coeffs);
    ordered_json j;
    try {
      j = ordered_json::parse(in);
      slope = poly_from_json(j.at("A"));
      intercept = poly_from_json(j.at("B"));
    } catch (const nlohmann::json::exception& e) {
      throw UsageError(a.coeffs + ": not a fit summary (" + e.what() + ")");
    }
  }
  const auto rows = calibration::build_db_table(slope, intercept, noise, n);
  Table t;
  t.columns = {"p", "A", "B", "k", "gib"};
  for (const auto& r : rows) {
    t.rows.push_back({Cell::real(r.noise), Cell::real(r.slope), Cell::real(r.intercept),
                      Cell::integer(r.k), Cell::real(r.gib)});
  }
  return t;
}

struct SimArgs {
  std::string k, pop, unenrolled, thr, trials = "1000", seed;
  NoiseArgs noise;
};

Table run_simulate(Command& c, SimArgs& a) {
  if (a.k.empty() || a.pop.empty()) throw UsageError("-k and -N are required");
  if (a.seed.empty()) a.seed = std::to_string(std::random_device{}());

  sim::SimConfig cfg;
  cfg.k = parse_int(a.k, "-k");
  cfg.enrolled = parse_count(a.pop, "-N");
  cfg.unenrolled = a.unenrolled.empty() ? 0 : parse_count(a.unenrolled, "--unenrolled");
  cfg.p = resolve_flip(c, a.noise);
  if (!a.thr.empty()) cfg.thr = parse_int(a.thr, "--thr");
  cfg.trials = parse_count(a.trials, "--trials");
  cfg.seed = parse_count(a.seed, "--seed");
  cfg.threads = c.threads();
  c.seeds.push_back(cfg.seed);

  const auto r = cfg.thr ? sim::estimate_open_world(cfg) : sim::estimate_accept_all(cfg);
  const auto model = MatchModel::build(cfg.k, cfg.p);

  struct Metric {
    const char* name;
    const sim::RateEstimate* est;
    std::optional<LogProb> analytic;
  };
  std::vector<Metric> metrics;
  if (!cfg.thr) {
    std::optional<LogProb> all;
    if (static_cast<double>(cfg.enrolled) * cfg.k <= kExactWorkCap) {
      all = accept_all_exact_log(model, cfg.enrolled);
    }
    const auto one = recognize_one_log(model, cfg.enrolled);
    metrics = {{"accept_all", &r.accept_all, all},
               {"correct", &r.correct, one},
               {"confused", &r.confused, LogProb(one.log_complement())}};
  } else {
    const OpenWorldModel m{cfg.k, cfg.p, cfg.enrolled, cfg.unenrolled};
    const int thr = *cfg.thr;
    const auto rej = fnir_n_log(m, thr);
    const auto conf = fnir_i_total_log(m, thr);
    const double correct = 1.0 - rej.linear() - conf.linear();
    metrics = {{"accept_all", &r.accept_all, std::nullopt},
               {"correct", &r.correct, LogProb::from_linear(std::max(0.0, correct))},
               {"rejected", &r.rejected, rej},
               {"confused", &r.confused, conf},
               {"confused_within", &r.confused_within, fnir_i_log(m, thr)}};
    if (cfg.unenrolled > 0) metrics.push_back({"false_positive", &r.false_positive, fpir_log(m, thr)});
  }

  Table t;
  t.columns = {"metric", "estimate", "stderr", "analytic", "z"};
  for (const auto& m : metrics) {
    const double est = m.est->rate();
    const double se = m.est->std_error();
    Cell z = Cell::empty();
    if (m.analytic) {
      const double diff = est - m.analytic->linear();
      if (se > 0.0) {
        z = Cell::real(diff / se);
      } else if (std::abs(diff) < 1e-12) {
        z = Cell::real(0.0);
      }
    }
    const Cell est_cell = c.common.log ? Cell::real(std::log(est)) : Cell::real(est);
    t.rows.push_back({Cell::str(m.name), est_cell, Cell::real(se),
                      m.analytic ? c.prob(*m.analytic) : Cell::empty(), z});
  }
  t.extra["trials"] = cfg.trials;
  t.extra["generator"] = r.generator;
  return t;
}

// ---------------------------------------------------------------- output

std::string render(const Command& c, const Table& t) {
  std::ostringstream os;
  if (c.common.format == "csv") {
    for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
    os << '\n';
    for (const auto& row : t.rows) {
      for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << csv_field(row[i]);
      os << '\n';
    }
    return os.str();
  }
  ordered_json doc;
  doc["command"] = c.name;
  doc["version"] = kVersion;
  doc["params"] = c.params();
  if (!c.seeds.empty()) doc["seeds"] = c.seeds;
  doc["columns"] = t.columns;
  ordered_json rows = ordered_json::array();
  for (const auto& row : t.rows) {
    ordered_json r = ordered_json::object();
    for (std::size_t i = 0; i < row.size(); ++i) r[t.columns[i]] = json_value(row[i]);
    rows.push_back(std::move(r));
  }
  doc["rows"] = std::move(rows);
  if (!t.extra.empty()) doc["extra"] = t.extra;
  os << doc.dump(2) << '\n';
  return os.str();
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << text;
  out.flush();
  if (!out) throw IoError("write failed: " + path);
}

int finish(const Command& c, const Table& t) {
  const auto text = render(c, t);
  if (c.common.out.empty()) {
    std::cout << text << std::flush;
  } else {
    write_file(c.common.out, text);
  }
  if (!c.common.manifest.empty()) {
    ordered_json m;
    m["tool"] = "bitcap";
    m["version"] = kVersion;
    m["command"] = c.name;
    m["params"] = c.params();
    m["seeds"] = c.seeds;
    m["timestamp"] = utc_timestamp();
    if (!c.common.out.empty()) m["output"] = c.common.out;
    write_file(c.common.manifest, m.dump(2) + "\n");
  }
  return kOk;
}

// ---------------------------------------------------------------- wiring

struct Cli {
  CLI::App app{"bitcap: template-size and error-rate calculator for biometric identification"};
  std::vector<std::unique_ptr<Command>> commands;
  CollisionArgs collision;
  AcceptArgs accept;
  PlanArgs plan;
  GridArgs sweep;
  FitArgs fit;
  DbArgs db;
  SimArgs simulate;
  std::string rerun_manifest;
  std::string rerun_out;
  CLI::App* rerun = nullptr;

  Command& add(const std::string& name, const std::string& help) {
    auto cmd = std::make_unique<Command>();
    cmd->name = name;
    cmd->app = app.add_subcommand(name, help);
    commands.push_back(std::move(cmd));
    return *commands.back();
  }

  Cli() {
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kVersion));

    auto& col = add("collision", "Zero-noise collision probability and minimal bit count");
    add_scalar(col, "--days", "days", collision.days, "Pattern count T");
    add_scalar(col, "--bits", "bits", collision.bits, "Template length k (T = 2^k)");
    add_scalar(col, "--people,--pop,-N", "pop", collision.people, "Population N");
    add_scalar(col, "--alpha", "alpha", collision.alpha, "Collision tolerance");
    add_common(col);
    col.run = [this](Command& c) { return run_collision(c, collision); };

    auto& acc = add("accept", "Probability that every enrolled user is recognised");
    add_scalar(acc, "-k,--bits", "bits", accept.k, "Template length");
    add_scalar(acc, "-N,--pop", "pop", accept.pop, "Enrolled population");
    add_noise(acc, accept.noise, "0");
    acc.app->add_option("--mode", accept.mode, "exact, bounds or auto")
        ->check(CLI::IsMember({"auto", "exact", "bounds"}));
    acc.opts.scalars.emplace_back("mode", &accept.mode);
    add_scalar(acc, "--intervals", "intervals", accept.intervals,
               "Equal intervals for the bounds (default: 100, geometric above 1e8)");
    add_common(acc);
    acc.run = [this](Command& c) { return run_accept(c, accept); };

    auto& pl = add("plan", "Template length and threshold meeting all three error budgets");
    add_scalar(pl, "--pop,-N", "pop", plan.pop, "Enrolled population N");
    add_scalar(pl, "--unenrolled", "unenrolled", plan.unenrolled,
               "Unenrolled population (default: N)");
    add_noise(pl, plan.noise, "0.05");
    add_scalar(pl, "--alpha", "alpha", plan.alpha, "Closed-world accept-all tolerance");
    add_scalar(pl, "--beta", "beta", plan.beta, "Maximum FNIR_n");
    add_scalar(pl, "--gamma", "gamma", plan.gamma, "Maximum aggregate false-positive rate");
    add_common(pl);
    pl.run = [this](Command& c) { return run_plan(c, plan); };

    auto& sw = add("sweep", "Minimal k over a noise x population grid");
    add_grid(sw, sweep);
    add_common(sw);
    sw.run = [this](Command& c) { return run_sweep(c, sweep); };

    auto& ft = add("fit", "Per-noise linear fits k = A log2 N + B and cubic A(p), B(p)");
    add_grid(ft, fit.grid);
    add_scalar(ft, "--input", "input", fit.input, "Fit an existing sweep CSV instead");
    add_scalar(ft, "--summary", "summary", fit.summary, "Write the fit summary JSON here");
    add_common(ft);
    ft.run = [this](Command& c) { return run_fit(c, fit); };

    auto& dt = add("dbtable", "Bits and database size per noise level");
    add_scalar(dt, "--pop,-N", "pop", db.pop, "Population N");
    add_list(dt, "--noise", "noise", db.noise, "Noise levels (default 0, 0.05, ..., 0.5)");
    add_scalar(dt, "--coeffs", "coeffs", db.coeffs,
               "Fit summary JSON with A/B polynomials (default: built-in coefficients)");
    add_common(dt);
    dt.run = [this](Command& c) { return run_dbtable(c, db); };

    auto& sm = add("simulate", "Monte Carlo estimates next to the analytic rates");
    add_scalar(sm, "-k,--bits", "bits", simulate.k, "Template length");
    add_scalar(sm, "-N,--pop", "pop", simulate.pop, "Enrolled population");
    add_scalar(sm, "--unenrolled", "unenrolled", simulate.unenrolled, "Unenrolled probes per trial");
    add_noise(sm, simulate.noise, "0");
    add_scalar(sm, "--thr", "thr", simulate.thr, "Acceptance threshold (open world)");
    add_scalar(sm, "--trials", "trials", simulate.trials, "Independent trials");
    add_scalar(sm, "--seed", "seed", simulate.seed, "Seed (random when omitted; recorded)");
    add_common(sm);
    sm.run = [this](Command& c) { return run_simulate(c, simulate); };

    rerun = app.add_subcommand("rerun", "Repeat a run from its manifest");
    rerun->add_option("manifest", rerun_manifest, "Manifest JSON")->required();
    rerun->add_option("-o,--out", rerun_out, "Write results here (default: stdout)");
  }
};

int dispatch(const std::vector<std::string>& args);

std::vector<std::string> argv_from_manifest(const std::string& path, const std::string& out) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  ordered_json m;
  try {
    m = ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(path + ": invalid manifest (" + e.what() + ")");
  }
  if (!m.contains("command") || !m.contains("params")) {
    throw UsageError(path + ": manifest lacks command or params");
  }
  std::vector<std::string> args{m["command"].get<std::string>()};
  for (const auto& [key, value] : m["params"].items()) {
    if (value.is_boolean()) {
      if (value.get<bool>()) args.push_back("--" + key);
    } else if (value.is_array()) {
      std::string joined;
      for (const auto& v : value) joined += (joined.empty() ? "" : ",") + v.get<std::string>();
      args.push_back("--" + key);
      args.push_back(joined);
    } else {
      args.push_back("--" + key);
      args.push_back(value.get<std::string>());
    }
  }
  if (!out.empty()) {
    args.push_back("--out");
    args.push_back(out);
  }
  return args;
}

int run_parsed(Cli& cli) {
  if (cli.rerun->parsed()) {
    return dispatch(argv_from_manifest(cli.rerun_manifest, cli.rerun_out));
  }
  for (auto& c : cli.commands) {
    if (c->app->parsed()) {
      const Table t = c->run(*c);
      return finish(*c, t);
    }
  }
  return kUsage;
}

int dispatch(const std::vector<std::string>& args) {
  Cli cli;
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    cli.app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int rc = cli.app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }
  try {
    return run_parsed(cli);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const DomainError& e) {
    std::cerr << "domain error: " << e.what() << '\n';
    return kDomain;
  } catch (const BudgetExceeded& e) {
    std::cerr << "over budget: " << e.what() << '\n';
    return kBudget;
  } catch (const Infeasible& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return kInfeasible;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIo;
  }
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return dispatch(args);
}
