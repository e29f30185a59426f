#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <optional>

#include "bitcap/bitcap.hpp"

namespace py = pybind11;
using namespace bitcap;

namespace {

py::dict bounds_dict(const std::optional<BoundPair>& b, const std::optional<LogProb>& exact) {
  py::dict d;
  d["low"] = b ? py::cast(b->low.linear()) : py::none();
  d["truth"] = exact ? py::cast(exact->linear()) : py::none();
  d["high"] = b ? py::cast(b->high.linear()) : py::none();
  d["ln_low"] = b ? py::cast(b->low.log()) : py::none();
  d["ln_truth"] = exact ? py::cast(exact->log()) : py::none();
  d["ln_high"] = b ? py::cast(b->high.log()) : py::none();
  return d;
}

py::dict rate_dict(const sim::RateEstimate& r) {
  py::dict d;
  d["events"] = r.events;
  d["total"] = r.total;
  d["rate"] = r.rate();
  d["stderr"] = r.std_error();
  return d;
}

}  // namespace

PYBIND11_MODULE(_bitcap, m) {
  m.doc() = "Template-size and error-rate calculations for biometric identification";
  m.attr("__version__") = kVersion;

  auto base_domain = py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<BudgetExceeded>(m, "BudgetExceeded", PyExc_RuntimeError);
  py::register_exception<Infeasible>(m, "Infeasible", PyExc_RuntimeError);
  (void)base_domain;

  m.def("flip_from_noise", &flip_from_noise, py::arg("noise"));
  m.def("noise_from_flip", &noise_from_flip, py::arg("flip"));

  // zero-noise collisions
  m.def(
      "collision",
      [](double patterns, std::uint64_t population) {
        const birthday::BirthdayQuery q{patterns, population};
        py::dict d;
        d["exact"] = population <= birthday::kExactPopulationCap
                         ? py::cast(birthday::no_collision_exact_log(q).complement())
                         : py::none();
        d["low"] = std::max(0.0, birthday::no_collision_upper_log(q).complement());
        d["high"] = birthday::no_collision_lower_log(q).complement();
        return d;
      },
      py::arg("patterns"), py::arg("population"),
      "Collision probability among N uniform draws from T patterns.");
  m.def("min_ratio_x", &birthday::min_ratio_x, py::arg("population"), py::arg("alpha"));
  m.def("min_bits", &birthday::min_bits, py::arg("population"), py::arg("alpha"));
  m.def("db_size_gib", &birthday::db_size_gib, py::arg("population"), py::arg("k"));

  // closed-world noisy matching
  m.def(
      "recognize_one",
      [](int k, double flip, std::uint64_t n) {
        return recognize_one_log(MatchModel::build(k, flip), n).linear();
      },
      py::arg("k"), py::arg("flip"), py::arg("n"));
  m.def(
      "accept_all",
      [](int k, double flip, std::uint64_t population, const std::string& mode,
         std::optional<int> intervals) {
        if (mode != "auto" && mode != "exact" && mode != "bounds") {
          throw DomainError("mode must be auto, exact or bounds");
        }
        const auto model = MatchModel::build(k, flip);
        std::optional<LogProb> exact;
        std::optional<BoundPair> b;
        const bool tractable = static_cast<double>(population) * k <= kExactWorkCap;
        if (mode == "exact" || (mode == "auto" && tractable)) {
          exact = accept_all_exact_log(model, population);
        }
        if (mode != "exact") {
          b = intervals ? accept_all_bounds(model, population,
                                            IntervalPartition::equal(population, *intervals))
                        : accept_all_bounds(model, population);
        }
        return bounds_dict(b, exact);
      },
      py::arg("k"), py::arg("flip"), py::arg("population"), py::arg("mode") = "auto",
      py::arg("intervals") = py::none());
  m.def(
      "accept_all_zero_noise",
      [](int k, std::uint64_t n) { return accept_all_zero_noise_log(k, n).linear(); },
      py::arg("k"), py::arg("population"));
  m.def("min_k", &min_k_for_accept, py::arg("population"), py::arg("flip"), py::arg("alpha"),
        py::arg("start_k") = 1);

  // open world
  m.def(
      "open_world_rates",
      [](int k, double flip, std::uint64_t enrolled, std::uint64_t unenrolled, int thr) {
        const OpenWorldModel om{k, flip, enrolled, unenrolled};
        py::dict d;
        d["fnir_n"] = fnir_n_log(om, thr).linear();
        d["fnir_i"] = fnir_i_log(om, thr).linear();
        d["fnir_i_total"] = fnir_i_total_log(om, thr).linear();
        d["fpir"] = fpir_log(om, thr).linear();
        d["fpir_aggregate"] = fpir_aggregate_log(om, thr).linear();
        return d;
      },
      py::arg("k"), py::arg("flip"), py::arg("enrolled"), py::arg("unenrolled"), py::arg("thr"));
  m.def(
      "plan",
      [](std::uint64_t enrolled, std::uint64_t unenrolled, double flip, double alpha,
         double beta, double gamma) {
        const auto p = plan_search({alpha, beta, gamma}, enrolled, unenrolled, flip);
        py::dict d;
        d["k0"] = p.k0;
        d["k"] = p.k;
        d["thr"] = p.thr;
        return d;
      },
      py::arg("enrolled"), py::arg("unenrolled"), py::arg("flip"), py::arg("alpha") = 1e-4,
      py::arg("beta") = 1e-2, py::arg("gamma") = 1e-4);

  // calibration
  m.def(
      "sweep",
      [](double noise, double alpha, std::vector<std::uint64_t> populations) {
        std::vector<py::tuple> out;
        for (const auto& r : calibration::sweep_k(noise, alpha, populations)) {
          out.push_back(py::make_tuple(r.noise, r.alpha, r.population, r.k_min));
        }
        return out;
      },
      py::arg("noise"), py::arg("alpha"), py::arg("populations"));
  m.def(
      "fit_line",
      [](std::vector<double> x, std::vector<double> y) {
        const auto f = calibration::fit_line(x, y);
        return py::make_tuple(f.slope, f.intercept, f.r2);
      },
      py::arg("x"), py::arg("y"));
  m.def(
      "db_table",
      [](std::vector<double> noise, std::uint64_t population) {
        std::vector<py::tuple> out;
        for (const auto& r : calibration::build_db_table(calibration::reference_slope_poly(),
                                                         calibration::reference_intercept_poly(),
                                                         noise, population)) {
          out.push_back(py::make_tuple(r.noise, r.slope, r.intercept, r.k, r.gib));
        }
        return out;
      },
      py::arg("noise"), py::arg("population"));

  // Monte Carlo
  m.def(
      "simulate",
      [](int k, std::uint64_t enrolled, double flip, std::optional<int> thr,
         std::uint64_t unenrolled, std::uint64_t trials, std::uint64_t seed, unsigned threads) {
        sim::SimConfig cfg{k, enrolled, unenrolled, flip, thr, trials, seed, threads};
        sim::SimResult r;
        {
          py::gil_scoped_release release;
          r = thr ? sim::estimate_open_world(cfg) : sim::estimate_accept_all(cfg);
        }
        py::dict d;
        d["trials"] = r.trials;
        d["accept_all"] = rate_dict(r.accept_all);
        d["correct"] = rate_dict(r.correct);
        d["confused"] = rate_dict(r.confused);
        d["rejected"] = rate_dict(r.rejected);
        d["confused_within"] = rate_dict(r.confused_within);
        d["false_positive"] = rate_dict(r.false_positive);
        d["generator"] = r.generator;
        return d;
      },
      py::arg("k"), py::arg("enrolled"), py::arg("flip"), py::arg("thr") = py::none(),
      py::arg("unenrolled") = 0, py::arg("trials") = 1000, py::arg("seed") = 1,
      py::arg("threads") = 1);
}
