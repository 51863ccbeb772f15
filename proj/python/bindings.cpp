#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "robustse/error.hpp"
#include "robustse/inference.hpp"
#include "robustse/montecarlo.hpp"
#include "robustse/regression.hpp"
#include "robustse/sim_report.hpp"
#include "robustse/variance.hpp"

namespace py = pybind11;
using namespace robustse;

namespace {

py::dict loo_dict(const LooResiduals& loo) {
  py::dict d;
  d["values"] = loo.values;
  d["feasible"] = std::vector<bool>(loo.feasible.begin(), loo.feasible.end());
  return d;
}

Controls make_controls(Index n, const std::optional<Matrix>& b,
                       const std::optional<std::vector<Index>>& groups) {
  Matrix dense = b ? *b : Matrix(n, 0);
  if (groups) return Controls::from_groups(*groups, std::move(dense));
  return Controls::from_matrix(std::move(dense));
}

py::dict test_dict(const TestResult& r) {
  py::dict d;
  d["statistic"] = r.statistic;
  d["p_value"] = r.p_value;
  py::dict reject;
  for (const auto& [level, value] : r.reject_at) reject[py::float_(level)] = value;
  d["reject_at"] = reject;
  return d;
}

py::object json_to_python(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

}  // namespace

PYBIND11_MODULE(_robustse, m) {
  m.doc() = "Robust covariance estimators, leave-one-out cross-fitting and replication studies";
  m.attr("__version__") = ROBUSTSE_VERSION;

  static py::exception<Error> error_type(m, "RobustseError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error_type, (std::string(to_string(e.kind())) + ": " + e.what()).c_str());
    }
  });

  m.def("methods", [] {
    std::vector<std::string> out;
    for (Method k : kAllMethods) out.emplace_back(to_string(k));
    return out;
  }, "Names of the available variance estimators.");

  m.def(
      "fit_ols",
      [](const Matrix& x, const Vector& y) {
        const OlsFit fit = fit_ols(x, y);
        py::dict d;
        d["beta_hat"] = fit.beta_hat;
        d["residuals"] = fit.residuals;
        d["m_diag"] = fit.m_diag;
        d["loo_residuals"] = loo_dict(fit.loo_residuals);
        d["rank"] = fit.rank;
        return d;
      },
      py::arg("x"), py::arg("y"), "Least squares with leverages and leave-one-out residuals.");

  m.def(
      "partial_out",
      [](const Matrix& a, const std::optional<Matrix>& b,
         const std::optional<std::vector<Index>>& groups, bool strict) {
        const PartialledDesign p = partial_out(a, make_controls(a.rows(), b, groups),
                                               strict ? RankPolicy::Strict : RankPolicy::Reduce);
        py::dict d;
        d["v_hat"] = p.v_hat;
        d["gram"] = p.gram;
        d["dropped"] = std::vector<bool>(p.dropped.begin(), p.dropped.end());
        d["leverage"] = p.controls.leverage();
        d["controls_rank"] = p.controls.rank();
        return d;
      },
      py::arg("a"), py::arg("b") = py::none(), py::arg("groups") = py::none(),
      py::arg("strict") = true, "Residualizes the focal block on the controls.");

  m.def("annihilator_diag", &annihilator_diag, py::arg("q"), "Diagonal of I - Q (Q'Q)^{-1} Q'.");

  m.def(
      "estimate_all",
      [](const Vector& y, const Matrix& a, const std::optional<Matrix>& b,
         const std::optional<std::vector<Index>>& groups, const std::string& methods,
         const std::optional<Vector>& sigma2) {
        Dataset data;
        data.y = y;
        data.A = a;
        data.B = make_controls(y.size(), b, groups);
        if (sigma2) data.truth = Truth{Vector(), *sigma2, Vector()};
        const EstimateSet set = estimate_all(data, parse_methods(methods));

        py::dict results;
        for (const auto& [method, outcome] : set.outcomes) {
          py::dict r;
          r["ok"] = outcome.ok();
          if (outcome.ok()) {
            r["omega"] = outcome.estimate->omega;
            r["indefinite"] = outcome.estimate->indefinite;
            r["warnings"] = outcome.estimate->warnings;
          } else {
            r["error"] = std::string(to_string(*outcome.error));
            r["message"] = outcome.message;
          }
          results[py::str(std::string(to_string(method)))] = r;
        }
        py::dict d;
        d["alpha_hat"] = set.fit.alpha_hat;
        d["residuals"] = set.fit.residuals;
        d["m_diag"] = set.fit.m_diag;
        d["rank"] = set.fit.rank;
        d["dropped"] = set.fit.dropped_count();
        d["results"] = results;
        d["warnings"] = set.warnings;
        return d;
      },
      py::arg("y"), py::arg("a"), py::arg("b") = py::none(), py::arg("groups") = py::none(),
      py::arg("methods") = "all", py::arg("sigma2") = py::none(),
      "Fits once and evaluates every requested covariance estimator.");

  m.def(
      "t_test",
      [](double alpha_hat, double alpha0, double omega) {
        return test_dict(t_test(alpha_hat, alpha0, omega));
      },
      py::arg("alpha_hat"), py::arg("alpha0"), py::arg("omega"));

  m.def(
      "wald_test",
      [](const Vector& alpha_hat, const Vector& alpha0, const Matrix& omega) {
        return test_dict(wald_test(alpha_hat, alpha0, omega));
      },
      py::arg("alpha_hat"), py::arg("alpha0"), py::arg("omega"));

  m.def(
      "run_study",
      [](const std::string& design, Index n, Index q, Index units, Index periods, Index reps,
         std::uint64_t seed, const std::string& methods, double level, unsigned threads) {
        SimConfig c;
        const auto kind = parse_design(design);
        if (!kind) throw Error(ErrorKind::InvalidConfig, "unknown design '" + design + "'");
        c.design = *kind;
        c.n = n;
        c.q = q;
        c.units = units;
        c.periods = periods;
        c.reps = reps;
        c.seed = seed;
        c.methods = parse_methods(methods);
        c.methods.insert(Method::Oracle);
        c.level = level;
        c.threads = threads;
        SimulationReport report;
        {
          py::gil_scoped_release release;
          report = run_study(c);
        }
        return json_to_python(simulation_json({report}));
      },
      py::arg("design") = "cjn", py::arg("n") = 500, py::arg("q") = 10, py::arg("N") = 100,
      py::arg("T") = 2, py::arg("reps") = 1000, py::arg("seed") = 1, py::arg("methods") = "all",
      py::arg("level") = 0.05, py::arg("threads") = 1,
      "Runs a replication study and returns the JSON report as a dict.");
}
