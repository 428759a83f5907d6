// Python bindings. Matrices cross as numpy arrays, distributions and
// estimators as opaque handles with JSON round trips.

#include "wcrc/audit.hpp"
#include "wcrc/error.hpp"
#include "wcrc/experiments.hpp"
#include "wcrc/io.hpp"
#include "wcrc/optimal.hpp"
#include "wcrc/regression.hpp"
#include "wcrc/samplers.hpp"
#include "wcrc/sdp.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <tuple>

namespace py = pybind11;
using namespace wcrc;

namespace {

using ScenarioTuple = std::tuple<IndexSet, IndexSet, double>;

ScenarioDistribution make_distribution(Index n, const std::vector<ScenarioTuple>& scenarios) {
  std::vector<Scenario> out;
  out.reserve(scenarios.size());
  for (const auto& [sample, target, p] : scenarios) out.emplace_back(sample, target, p, n);
  return ScenarioDistribution(n, std::move(out));
}

std::vector<ScenarioTuple> scenario_tuples(const ScenarioDistribution& d) {
  std::vector<ScenarioTuple> out;
  for (const auto& s : d.scenarios()) out.emplace_back(s.sample(), s.target(), s.probability());
  return out;
}

Eigen::MatrixXd dense_weights(const SemilinearEstimator& est) {
  Eigen::MatrixXd W(static_cast<Index>(est.size()), est.population_size());
  for (std::size_t i = 0; i < est.size(); ++i) W.row(static_cast<Index>(i)) = est.weights(i).dense();
  return W;
}

SemilinearEstimator estimator_from_dense(const Eigen::MatrixXd& W, std::optional<Eigen::MatrixXd> V) {
  std::vector<SparseVector> rows;
  for (Index i = 0; i < W.rows(); ++i) {
    std::vector<WeightEntry> e;
    for (Index j = 0; j < W.cols(); ++j)
      if (W(i, j) != 0.0) e.push_back({j, W(i, j)});
    rows.emplace_back(W.cols(), std::move(e));
  }
  return SemilinearEstimator(W.cols(), std::move(rows), std::move(V));
}

Observations to_observations(const std::map<Index, double>& observed) {
  Observations out;
  for (const auto& [j, v] : observed) out.push_back({j, v});
  return out;
}

SolverConfig solver_config(double eig_floor, double rel_tol, int max_iters) {
  SolverConfig cfg;
  cfg.eig_floor = eig_floor;
  cfg.rel_tol = rel_tol;
  cfg.max_iters = max_iters;
  return cfg;
}

py::dict report_dict(const RegressionReport& r) {
  py::dict d;
  d["beta_hat"] = r.beta_hat;
  d["Q_hat"] = r.Q_hat;
  d["u_hat"] = r.u_hat;
  d["alpha"] = r.alpha;
  d["sigma_min_q_hat"] = r.sigma_min_q_hat;
  d["known_features"] = r.known_features;
  d["beta_true"] = r.beta_true;
  d["sigma_d_true"] = r.sigma_d_true;
  d["error_norm"] = r.error_norm;
  d["bound_value"] = r.bound_value;
  d["admissible"] = r.admissible();
  d["bound_holds"] = r.bound_holds();
  return d;
}

py::dict audit_dict(const AuditReport& r) {
  py::dict d;
  d["sdp_upper"] = r.sdp_upper;
  d["rounding_lower"] = r.rounding_lower;
  d["exact_value"] = r.exact_value;
  d["witness_x"] = r.witness_x;
  d["solver_residual"] = r.solver_residual;
  d["best_rounded"] = r.best_rounded;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Worst-case robust estimation from scenario distributions";

  // Translators run newest first, so SolverError is matched before Error.
  const auto& error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<SolverError>(m, "SolverError", error.ptr());

  py::class_<ScenarioDistribution>(m, "Distribution")
      .def(py::init(&make_distribution), py::arg("n"), py::arg("scenarios"),
           "scenarios: list of (sample, target, probability)")
      .def_static("uniform",
                  [](Index n, const std::vector<std::pair<IndexSet, IndexSet>>& pairs) {
                    return ScenarioDistribution::uniform(n, pairs);
                  })
      .def_static("from_json", [](const std::string& s) { return distribution_from_json(Json::parse(s)); })
      .def_static("load", &load_distribution)
      .def("to_json", [](const ScenarioDistribution& d) { return distribution_to_json(d).dump(); })
      .def("save", [](const ScenarioDistribution& d, const std::filesystem::path& p) { save_distribution(d, p); })
      .def_property_readonly("n", &ScenarioDistribution::population_size)
      .def("scenarios", &scenario_tuples)
      .def("__len__", &ScenarioDistribution::size);

  py::class_<SemilinearEstimator>(m, "Estimator")
      .def(py::init(&estimator_from_dense), py::arg("weights"), py::arg("certificate") = py::none(),
           "weights: one dense row per scenario")
      .def_static("from_json", [](const std::string& s) { return estimator_from_json(Json::parse(s)); })
      .def("to_json", [](const SemilinearEstimator& e) { return estimator_to_json(e).dump(); })
      .def_property_readonly("weights", &dense_weights)
      .def_property_readonly("certificate", [](const SemilinearEstimator& e) { return e.certificate(); })
      .def("estimate",
           [](const SemilinearEstimator& e, std::size_t i, const std::map<Index, double>& observed) {
             return estimate(e, i, to_observations(observed));
           })
      .def("mse", [](const SemilinearEstimator& e, const ScenarioDistribution& d,
                     const Eigen::VectorXd& x) { return mse_on_values(e, d, x); })
      .def("__len__", &SemilinearEstimator::size);

  m.def(
      "gen_importance",
      [](const Eigen::VectorXd& probs, int num_scenarios, std::uint64_t seed) {
        return gen_importance({probs, num_scenarios, seed});
      },
      py::arg("inclusion_probs"), py::arg("num_scenarios") = 1000, py::arg("seed") = 0);
  m.def(
      "gen_selective", [](Index n, std::uint64_t seed) { return gen_selective({n, seed}); }, py::arg("n"),
      py::arg("seed") = 0);
  m.def(
      "gen_snowball",
      [](Index num_points, int neighbor_count, int recruits, Index sample_size, int num_scenarios,
         std::uint64_t seed) {
        auto [pop, dist] = gen_snowball({num_points, neighbor_count, recruits, sample_size, num_scenarios, seed});
        return std::make_pair(Eigen::MatrixXd(pop.points), std::move(dist));
      },
      py::arg("num_points") = 50, py::arg("neighbor_count") = 5, py::arg("recruits_per_node") = 2,
      py::arg("sample_size") = 15, py::arg("num_scenarios") = 1000, py::arg("seed") = 0,
      "Returns (points, distribution).");

  m.def(
      "baseline",
      [](const std::string& kind, const ScenarioDistribution& d, std::optional<Eigen::VectorXd> probs,
         std::optional<std::vector<IndexSet>> groups) -> SemilinearEstimator {
        if (kind == "sample_mean") return baseline_estimator(SampleMean{}, d);
        if (kind == "recent_window") return baseline_estimator(RecentWindow{}, d);
        if (kind == "horvitz_thompson") {
          if (!probs) throw Error(ErrorCode::kInvalidArgument, "horvitz_thompson needs probs");
          return baseline_estimator(HorvitzThompson{*probs}, d);
        }
        if (kind == "subgroup") {
          if (!groups) throw Error(ErrorCode::kInvalidArgument, "subgroup needs groups");
          return baseline_estimator(Subgroup{*groups}, d);
        }
        throw Error(ErrorCode::kInvalidArgument, "unknown baseline " + kind);
      },
      py::arg("kind"), py::arg("dist"), py::arg("probs") = py::none(), py::arg("groups") = py::none());

  m.def(
      "build_M", [](const SemilinearEstimator& e, const ScenarioDistribution& d) { return build_M(e, d).matrix(); },
      py::arg("estimator"), py::arg("dist"));
  m.def(
      "exact_worst_case",
      [](const Eigen::MatrixXd& M, Index threshold) {
        auto r = exact_worst_case(QuadraticFormMatrix(M), threshold);
        return std::make_pair(r.value, r.witness);
      },
      py::arg("M"), py::arg("threshold") = kDefaultExactThreshold, "Returns (value, witness).");
  m.def(
      "sdp_upper_bound",
      [](const Eigen::MatrixXd& M, double rel_tol) {
        auto s = sdp_upper_bound(QuadraticFormMatrix(M), solver_config(0.0, rel_tol, 20000));
        return std::make_tuple(s.V, s.objective, s.residual);
      },
      py::arg("M"), py::arg("rel_tol") = 1e-6, "Returns (V, objective, residual).");
  m.def(
      "round_certificate",
      [](const Eigen::MatrixXd& V, const Eigen::MatrixXd& M, std::uint64_t seed, int rounds) {
        auto r = round_certificate(V, QuadraticFormMatrix(M), seed, rounds);
        py::dict d;
        d["best_x"] = r.best_x;
        d["best_value"] = r.best_value;
        d["closed_form"] = r.closed_form;
        d["mc_mean"] = r.mc_mean;
        d["mc_stderr"] = r.mc_stderr;
        return d;
      },
      py::arg("V"), py::arg("M"), py::arg("seed") = 0, py::arg("rounds") = 1000);
  m.def(
      "audit",
      [](const SemilinearEstimator& e, const ScenarioDistribution& d, bool exact, int rounds, std::uint64_t seed) {
        AuditConfig cfg;
        cfg.exact = exact;
        cfg.num_rounds = rounds;
        cfg.rng_seed = seed;
        return audit_dict(audit(build_M(e, d), cfg));
      },
      py::arg("estimator"), py::arg("dist"), py::arg("exact") = true, py::arg("rounds") = 1000,
      py::arg("seed") = 0);

  m.def(
      "solve_schur",
      [](const ScenarioDistribution& d, double eig_floor, double rel_tol) {
        auto s = solve_schur(d, solver_config(eig_floor, rel_tol, 200));
        return std::make_tuple(s.V, s.objective, s.residual);
      },
      py::arg("dist"), py::arg("eig_floor") = kDefaultDesignFloor, py::arg("rel_tol") = 1e-6,
      "Returns (V, objective, residual).");
  m.def(
      "schur_objective",
      [](const ScenarioDistribution& d, const Eigen::MatrixXd& V) {
        auto s = schur_objective(d, V);
        return std::make_tuple(s.objective, s.terms, s.gradient);
      },
      py::arg("dist"), py::arg("V"), "Returns (objective, terms, gradient).");
  m.def(
      "solve_full",
      [](const ScenarioDistribution& d) {
        auto s = solve_full(d);
        return std::make_tuple(std::move(s.estimator), s.sdp_bound, s.residual);
      },
      py::arg("dist"), "Returns (estimator, sdp_bound, residual).");
  m.def(
      "weights_from_certificate",
      [](const Eigen::MatrixXd& V, const IndexSet& sample, const IndexSet& target) {
        return weights_from_certificate(V, sample, target).dense();
      },
      py::arg("V"), py::arg("sample"), py::arg("target"));
  m.def(
      "estimate_sampled",
      [](const ScenarioDistribution& samples, const IndexSet& sample, const IndexSet& target,
         const std::map<Index, double>& observed, double eps) {
        return estimate_sampled(samples, QueryInstance{sample, target, to_observations(observed)}, eps);
      },
      py::arg("samples"), py::arg("sample"), py::arg("target"), py::arg("observed"), py::arg("eps") = 1e-3);

  m.def(
      "fit_regression",
      [](const ScenarioDistribution& d, const IndexSet& sample, const IndexSet& target,
         const Eigen::MatrixXd& features, const Eigen::VectorXd& labels, double delta, bool known_features) {
        const auto design = regression_design(d);
        const LabeledData data{features, labels};
        return report_dict(known_features ? fit_known_features(design, sample, target, data, delta)
                                          : fit(design, sample, target, data, delta));
      },
      py::arg("dist"), py::arg("sample"), py::arg("target"), py::arg("features"), py::arg("labels"),
      py::arg("delta") = 0.2, py::arg("known_features") = false);

  m.def(
      "run_experiment",
      [](const std::string& spec_json) {
        const auto res = run_experiment(spec_from_json(Json::parse(spec_json)));
        py::list rows;
        for (const auto& r : res.rows) {
          py::dict d;
          d["experiment"] = r.experiment;
          d["estimator"] = r.estimator;
          d["values"] = r.values;
          d["metric"] = r.metric;
          d["sweep"] = r.sweep;
          d["seed"] = r.seed;
          rows.append(d);
        }
        return rows;
      },
      py::arg("spec_json"), "Runs an experiment spec given as JSON text; returns result rows.");
}
