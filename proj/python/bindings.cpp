#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "herit/estimators.hpp"
#include "herit/experiments.hpp"
#include "herit/io.hpp"
#include "herit/moments.hpp"

namespace py = pybind11;
using namespace herit;

namespace {

SecondOrderVariant parse_variant(const std::string& name) {
  if (name == "corrected") return {};
  if (name == "printed") return SecondOrderVariant::printed();
  throw std::invalid_argument("variant must be 'corrected' or 'printed', got '" + name + "'");
}

GrmView view(const Matrix& g, std::size_t n_loci) {
  if (g.rows() != g.cols()) throw std::invalid_argument("relationship matrix must be square");
  return {g, n_loci};
}

py::dict report(const EstimateReport& r) {
  py::dict d;
  d["method"] = std::string(to_string(r.method));
  d["eta_hat"] = r.eta_hat;
  d["raw_ratio"] = r.raw_ratio;
  d["iterations"] = r.iterations;
  d["converged"] = r.converged;
  d["used_fallback"] = r.used_fallback;
  d["objective_value"] = r.objective_value;
  return d;
}

}  // namespace

PYBIND11_MODULE(_herit, m) {
  m.doc() = "Case-control heritability: simulation, relationship matrices and moment estimators.";

  py::register_exception<InvalidDesign>(m, "InvalidDesign", PyExc_ValueError);
  py::register_exception<DegenerateDesign>(m, "DegenerateDesign", PyExc_RuntimeError);
  py::register_exception<NotPositiveDefinite>(m, "NotPositiveDefinite", PyExc_ValueError);

  py::class_<StudyDesign>(m, "StudyDesign")
      .def_readonly("K", &StudyDesign::K)
      .def_readonly("P", &StudyDesign::P)
      .def_readonly("t", &StudyDesign::t)
      .def_readonly("p_case", &StudyDesign::p_case)
      .def_readonly("p_control", &StudyDesign::p_control)
      .def("__repr__", [](const StudyDesign& d) {
        return "StudyDesign(K=" + format_double(d.K) + ", P=" + format_double(d.P) + ")";
      });

  m.def("design_from_prevalences", &design_from_prevalences, py::arg("K"), py::arg("P"));
  m.def("constant_c", &constant_c, py::arg("design"));

  m.def("std_normal_cdf", &std_normal_cdf, py::arg("x"));
  m.def("std_normal_quantile", &std_normal_quantile, py::arg("p"));
  m.def(
      "bvn_rect",
      [](double lo1, double hi1, double lo2, double hi2, double v11, double v22, double v12) {
        return bvn_rect(lo1, hi1, lo2, hi2, {v11, v22, v12});
      },
      py::arg("lo1"), py::arg("hi1"), py::arg("lo2"), py::arg("hi2"), py::arg("v11") = 1.0,
      py::arg("v22") = 1.0, py::arg("v12") = 0.0,
      "P(lo1 < X < hi1, lo2 < Y < hi2) for a centred bivariate normal; infinities allowed.");

  m.def(
      "exact_pair_expectation",
      [](double a_i, double a_j, double b_ij, const StudyDesign& d, double eta, double n_loci) {
        return exact_pair_expectation({a_i, a_j, b_ij}, d, eta, n_loci);
      },
      py::arg("a_i"), py::arg("a_j"), py::arg("b_ij"), py::arg("design"), py::arg("eta"), py::arg("n_loci"));
  m.def("first_order_pair_expectation", &first_order_pair_expectation, py::arg("g_ij"), py::arg("design"),
        py::arg("eta"));
  m.def(
      "second_order_pair_expectation",
      [](double a_i, double a_j, double b_ij, const StudyDesign& d, double eta, double n_loci,
         const std::string& variant) {
        return second_order_pair_expectation({a_i, a_j, b_ij}, d, eta, n_loci, parse_variant(variant));
      },
      py::arg("a_i"), py::arg("a_j"), py::arg("b_ij"), py::arg("design"), py::arg("eta"), py::arg("n_loci"),
      py::arg("variant") = "corrected");

  m.def(
      "simulate_study",
      [](double eta_star, double K, double P, std::size_t n_loci, std::size_t target_cases, std::uint64_t seed,
         const std::string& kind) {
        StudyConfig cfg{eta_star, K, P, n_loci, target_cases, parse_genotype_kind(kind)};
        SimulatedStudy s;
        {
          py::gil_scoped_release release;
          s = simulate_study(cfg, seed);
        }
        py::dict d;
        d["design"] = s.design;
        d["population_size"] = s.population_size;
        d["population_cases"] = s.population_cases;
        d["indices"] = s.sample.indices;
        d["y"] = s.sample.y;
        d["w"] = s.sample.w;
        d["z"] = s.sample.z_study;
        d["raw"] = s.raw.values;
        d["dropped_loci"] = s.sample.dropped_loci;
        d["n_cases"] = s.sample.n_cases;
        d["n_controls"] = s.sample.n_controls;
        return d;
      },
      py::arg("eta_star") = 0.5, py::arg("K") = 0.1, py::arg("P") = 0.5, py::arg("n_loci") = 10000,
      py::arg("target_cases") = 100, py::arg("seed") = 1, py::arg("kind") = "binomial",
      "Simulate one ascertained study. Returns a dict with w, z (n x N standardised genotypes) and metadata.");

  m.def(
      "grm",
      [](const Matrix& z) {
        py::gil_scoped_release release;
        return grm_compute(z).g;
      },
      py::arg("z"), "G = Z Z' / N.");
  m.def(
      "offdiag_square_mean", [](const Matrix& g, std::size_t n_loci) { return offdiag_square_mean(view(g, n_loci)); },
      py::arg("g"), py::arg("n_loci"));

  m.def(
      "estimate_first_order",
      [](const Vector& w, const Matrix& g, std::size_t n_loci, const StudyDesign& d) {
        return report(estimate_first_order(as_span(w), view(g, n_loci), d));
      },
      py::arg("w"), py::arg("g"), py::arg("n_loci"), py::arg("design"));
  m.def(
      "estimate_second_order",
      [](const Vector& w, const Matrix& g, std::size_t n_loci, const StudyDesign& d, const std::string& variant) {
        return report(estimate_second_order(as_span(w), view(g, n_loci), d, parse_variant(variant)));
      },
      py::arg("w"), py::arg("g"), py::arg("n_loci"), py::arg("design"), py::arg("variant") = "corrected");
  m.def(
      "second_order_objective",
      [](double eta, const Vector& w, const Matrix& g, std::size_t n_loci, const StudyDesign& d) {
        return second_order_objective(eta, as_span(w), view(g, n_loci), d);
      },
      py::arg("eta"), py::arg("w"), py::arg("g"), py::arg("n_loci"), py::arg("design"));
}
