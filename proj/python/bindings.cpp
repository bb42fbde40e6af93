#include <cmath>

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dpht/error.hpp"
#include "dpht/evalharness.hpp"
#include "dpht/io.hpp"
#include "dpht/nullsim.hpp"
#include "dpht/pvalue.hpp"
#include "dpht/stats.hpp"
#include "dpht/testbed.hpp"

namespace py = pybind11;

namespace {

dpht::CountTable table_from_rows(const std::vector<std::vector<std::int64_t>>& rows) {
  return dpht::CountTable::from_rows(rows);
}

std::vector<std::vector<std::int64_t>> table_rows(const dpht::CountTable& t) {
  std::vector<std::vector<std::int64_t>> out(t.rows());
  for (std::size_t i = 0; i < t.rows(); ++i)
    for (std::size_t j = 0; j < t.cols(); ++j) out[i].push_back(t.at(i, j));
  return out;
}

std::vector<std::vector<double>> noisy_rows(const dpht::NoisyTable& nt) {
  std::vector<std::vector<double>> out(nt.rows());
  for (std::size_t i = 0; i < nt.rows(); ++i)
    for (std::size_t j = 0; j < nt.cols(); ++j) out[i].push_back(nt.table.at(i, j));
  return out;
}

dpht::RealTable real_from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty() || rows.front().empty()) throw dpht::Error(dpht::ErrorCode::EmptyInput, "table is empty");
  dpht::RealTable t{rows.size(), rows.front().size(), {}};
  for (const auto& r : rows) {
    if (r.size() != t.cols) throw dpht::Error(dpht::ErrorCode::NonRectangular, "rows differ in length");
    t.values.insert(t.values.end(), r.begin(), r.end());
  }
  return t;
}

dpht::NoiseSpec make_noise(const std::string& noise, double epsilon, double sensitivity) {
  if (noise == "laplace") return dpht::NoiseSpec::laplace(epsilon, sensitivity);
  if (noise == "gaussian") {
    const double sigma = std::isinf(epsilon) ? 0.0 : std::sqrt(2.0) * sensitivity / epsilon;
    return dpht::NoiseSpec::gaussian(sigma, epsilon, sensitivity);
  }
  throw dpht::Error(dpht::ErrorCode::InvalidArgument, "noise must be 'laplace' or 'gaussian'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Differentially private hypothesis tests for contingency tables";

  static py::exception<dpht::Error> dpht_error(m, "DphtError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const dpht::Error& e) {
      py::object err = dpht_error;
      py::object instance = err(e.what());
      instance.attr("code") = std::string(dpht::to_string(e.code()));
      PyErr_SetObject(err.ptr(), instance.ptr());
    }
  });

  py::enum_<dpht::StatisticKind>(m, "Statistic")
      .value("CHI2", dpht::StatisticKind::Chi2)
      .value("LR", dpht::StatisticKind::LR)
      .value("LR_MODIFIED", dpht::StatisticKind::LRModified)
      .value("LL", dpht::StatisticKind::LL)
      .value("DIFF", dpht::StatisticKind::Diff);

  py::enum_<dpht::TestKind>(m, "Test")
      .value("GOF", dpht::TestKind::GoodnessOfFit)
      .value("PROPORTIONS", dpht::TestKind::Proportions)
      .value("INDEPENDENCE", dpht::TestKind::Independence);

  py::class_<dpht::CountTable>(m, "CountTable")
      .def(py::init(&table_from_rows), py::arg("rows"))
      .def_property_readonly("rows", &dpht::CountTable::rows)
      .def_property_readonly("cols", &dpht::CountTable::cols)
      .def_property_readonly("total", &dpht::CountTable::total)
      .def_property_readonly("row_sums", &dpht::CountTable::row_sums)
      .def_property_readonly("col_sums", &dpht::CountTable::col_sums)
      .def("to_list", &table_rows)
      .def("to_json", [](const dpht::CountTable& t) { return dpht::to_json(t).dump(); })
      .def("__eq__", &dpht::CountTable::operator==)
      .def("__repr__", [](const dpht::CountTable& t) { return "CountTable(" + dpht::to_json(t)["counts"].dump() + ")"; });

  py::class_<dpht::NoisyTable>(m, "NoisyTable")
      .def_property_readonly("rows", &dpht::NoisyTable::rows)
      .def_property_readonly("cols", &dpht::NoisyTable::cols)
      .def_readonly("n0", &dpht::NoisyTable::n0_declared)
      .def_property_readonly("epsilon", [](const dpht::NoisyTable& nt) { return nt.provenance.noise.epsilon; })
      .def_property_readonly("scale", [](const dpht::NoisyTable& nt) { return nt.provenance.noise.scale; })
      .def_property_readonly("seed", [](const dpht::NoisyTable& nt) { return nt.provenance.seed; })
      .def("to_list", &noisy_rows)
      .def("to_json", [](const dpht::NoisyTable& nt) { return dpht::to_json(nt).dump(); })
      .def_static("from_json", [](const std::string& s) { return dpht::noisy_table_from_json(dpht::Json::parse(s)); });

  py::class_<dpht::TestResult>(m, "TestResult")
      .def_readonly("t_star", &dpht::TestResult::t_star)
      .def_readonly("m", &dpht::TestResult::m)
      .def_readonly("exceed", &dpht::TestResult::exceed)
      .def_readonly("p_value", &dpht::TestResult::p_value)
      .def_readonly("flags", &dpht::TestResult::flags)
      .def_readonly("seed", &dpht::TestResult::seed)
      .def("to_json", [](const dpht::TestResult& r) { return dpht::to_json(r).dump(); });

  py::class_<dpht::SensitivityReport>(m, "SensitivityReport")
      .def_readonly("s_h", &dpht::SensitivityReport::s_h)
      .def_readonly("branch", &dpht::SensitivityReport::branch)
      .def_readonly("brute_force", &dpht::SensitivityReport::brute_force)
      .def_readonly("flags", &dpht::SensitivityReport::flags)
      .def("to_json", [](const dpht::SensitivityReport& r) { return dpht::to_json(r).dump(); });

  m.def("builtin_fixture", &dpht::builtin_fixture, py::arg("name"));
  m.def("parse_table", [](const std::string& text) { return dpht::parse_table(text); }, py::arg("text"));

  m.def(
      "privatize",
      [](const dpht::CountTable& t, double epsilon, std::uint64_t seed, double sensitivity, const std::string& noise) {
        return dpht::perturb_table(t, make_noise(noise, epsilon, sensitivity), seed);
      },
      py::arg("table"), py::arg("epsilon"), py::arg("seed"), py::arg("sensitivity") = dpht::kTableSensitivity,
      py::arg("noise") = "laplace");
  m.def(
      "exact",
      [](const dpht::CountTable& t) { return dpht::perturb_table(t, dpht::NoiseSpec::identity(), 0); },
      py::arg("table"), "Wrap an exact table as a release with epsilon = inf.");

  m.def(
      "chi2_independence",
      [](const std::vector<std::vector<double>>& rows) { return dpht::chi2_independence(real_from_rows(rows)).stat.value; },
      py::arg("table"));
  m.def(
      "lr_independence",
      [](const std::vector<std::vector<double>>& rows) { return dpht::lr_independence(real_from_rows(rows)).stat.value; },
      py::arg("table"));
  m.def("classical_pvalue_chi2", &dpht::classical_pvalue_chi2, py::arg("stat"), py::arg("df"));

  m.def(
      "run_test",
      [](const std::string& test, const std::vector<dpht::NoisyTable>& tables, const std::string& statistic,
         std::size_t m_refs, std::uint64_t seed, std::optional<std::vector<double>> theta, unsigned threads,
         bool smoothing) {
        dpht::TestRequest req;
        req.test = dpht::parse_test(test);
        req.statistic = dpht::parse_statistic(statistic);
        req.tables = tables;
        req.m = m_refs;
        req.seed = seed;
        req.threads = threads;
        req.smoothing = smoothing;
        if (theta) req.theta0 = dpht::Theta::vector(*theta);
        py::gil_scoped_release release;
        return dpht::run_test(req);
      },
      py::arg("test"), py::arg("tables"), py::arg("statistic") = "chi2", py::arg("m") = dpht::kDefaultReferenceCount,
      py::arg("seed") = 0, py::arg("theta") = py::none(), py::arg("threads") = 1, py::arg("smoothing") = false);

  m.def(
      "naive_js_pvalue",
      [](const dpht::NoisyTable& nt, const std::string& test, const std::string& statistic,
         std::optional<std::vector<double>> theta) {
        std::optional<dpht::Theta> th;
        if (theta) th = dpht::Theta::vector(*theta);
        return dpht::naive_js_pvalue(nt, dpht::parse_test(test), dpht::parse_statistic(statistic), th);
      },
      py::arg("table"), py::arg("test") = "independence", py::arg("statistic") = "chi2", py::arg("theta") = py::none());

  m.def(
      "sensitivity",
      [](const std::string& statistic, std::vector<std::int64_t> rows, std::vector<std::int64_t> cols,
         bool brute_force) {
        return dpht::sensitivity(dpht::parse_statistic(statistic), dpht::make_margins(std::move(rows), std::move(cols)),
                                 brute_force);
      },
      py::arg("statistic"), py::arg("row_sums"), py::arg("col_sums"), py::arg("brute_force") = false);
  m.def(
      "brute_force_sensitivity",
      [](const std::string& statistic, std::vector<std::int64_t> rows, std::vector<std::int64_t> cols) {
        return dpht::brute_force_sensitivity(dpht::parse_statistic(statistic),
                                             dpht::make_margins(std::move(rows), std::move(cols)));
      },
      py::arg("statistic"), py::arg("row_sums"), py::arg("col_sums"));

  m.def(
      "testbed_pvalue",
      [](const dpht::CountTable& t, const std::string& statistic, const std::string& mode, double epsilon,
         std::size_t m_refs, std::uint64_t seed, unsigned threads) {
        py::gil_scoped_release release;
        return dpht::testbed_pvalue(t, dpht::parse_statistic(statistic), dpht::parse_mode(mode), epsilon, m_refs, seed,
                                    threads);
      },
      py::arg("table"), py::arg("statistic") = "chi2", py::arg("mode") = "input", py::arg("epsilon") = dpht::kInfinity,
      py::arg("m") = dpht::kDefaultReferenceCount, py::arg("seed") = 0, py::arg("threads") = 1);

  m.def(
      "permutation_null_sample",
      [](std::vector<std::int64_t> rows, std::vector<std::int64_t> cols, std::uint64_t seed) {
        dpht::Stream rng(seed);
        return dpht::permutation_null_sample(dpht::make_margins(std::move(rows), std::move(cols)), rng);
      },
      py::arg("row_sums"), py::arg("col_sums"), py::arg("seed"));

  m.def(
      "sample_multinomial_gaussian",
      [](const std::vector<double>& theta, std::size_t draws, std::uint64_t seed) {
        std::vector<std::vector<double>> out;
        out.reserve(draws);
        for (std::size_t k = 0; k < draws; ++k) {
          dpht::Stream rng(seed, k);
          out.push_back(dpht::sample_multinomial_gaussian(theta, rng));
        }
        return out;
      },
      py::arg("theta"), py::arg("draws"), py::arg("seed"));

  m.def("ks_uniform", &dpht::ks_uniform, py::arg("pvalues"));
}
