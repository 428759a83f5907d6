// Command-line front end: scenario generation, audits, estimator design,
// single-query prediction, regression and the experiment sweeps.

#include "wcrc/audit.hpp"
#include "wcrc/error.hpp"
#include "wcrc/experiments.hpp"
#include "wcrc/io.hpp"
#include "wcrc/optimal.hpp"
#include "wcrc/regression.hpp"
#include "wcrc/samplers.hpp"

#include <CLI11.hpp>

#include <iomanip>
#include <iostream>

namespace {

using namespace wcrc;

enum ExitCode { kOk = 0, kFailure = 1, kNotConverged = 2 };

template <class T>
T field(const Json& j, const char* key, T fallback) {
  try {
    return j.value(key, fallback);
  } catch (const Json::type_error& e) {
    throw Error(ErrorCode::kMalformedSchema, std::string("field '") + key + "': " + e.what());
  }
}

ScenarioDistribution generate(const std::string& process, const Json& cfg,
                              const std::string& points_out) {
  if (process == "importance") {
    ImportanceConfig c;
    const auto probs = field<std::vector<double>>(cfg, "inclusion_probs", {});
    c.inclusion_probs = Eigen::Map<const Eigen::VectorXd>(probs.data(), static_cast<Index>(probs.size()));
    c.num_scenarios = field(cfg, "num_scenarios", c.num_scenarios);
    c.rng_seed = field(cfg, "rng_seed", c.rng_seed);
    return gen_importance(c);
  }
  if (process == "snowball") {
    SnowballConfig c;
    c.num_points = field(cfg, "num_points", c.num_points);
    c.neighbor_count = field(cfg, "neighbor_count", c.neighbor_count);
    c.recruits_per_node = field(cfg, "recruits_per_node", c.recruits_per_node);
    c.sample_size = field(cfg, "sample_size", c.sample_size);
    c.num_scenarios = field(cfg, "num_scenarios", c.num_scenarios);
    c.rng_seed = field(cfg, "rng_seed", c.rng_seed);
    auto [pop, dist] = gen_snowball(c);
    if (!points_out.empty()) save_points_csv(pop, points_out);
    return std::move(dist);
  }
  SelectiveConfig c;
  c.n = field(cfg, "n", c.n);
  c.rng_seed = field(cfg, "rng_seed", c.rng_seed);
  c.enumerate = field(cfg, "enumerate", c.enumerate);
  c.num_scenarios = field(cfg, "num_scenarios", c.num_scenarios);
  return gen_selective(c);
}

void emit(const Json& j, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << j.dump(2) << '\n';
  } else {
    write_json(j, out);
  }
}

Json report_json(const RegressionReport& r) {
  auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.begin(), v.end()); };
  Json out = {{"beta_hat", vec(r.beta_hat)},
              {"Q_hat", matrix_to_json(r.Q_hat)},
              {"u_hat", vec(r.u_hat)},
              {"alpha", r.alpha},
              {"delta", r.delta},
              {"sigma_min_Q_hat", r.sigma_min_q_hat},
              {"known_features", r.known_features},
              {"admissible", r.admissible()}};
  auto opt = [&](const char* key, const auto& v, auto conv) {
    out[key] = v ? Json(conv(*v)) : Json(nullptr);
  };
  auto same = [](double d) { return d; };
  opt("beta_true", r.beta_true, vec);
  opt("sigma_d_true", r.sigma_d_true, same);
  opt("error_norm", r.error_norm, same);
  opt("bound_value", r.bound_value, same);
  opt("F", r.F, [](const Eigen::MatrixXd& m) { return matrix_to_json(m); });
  opt("g", r.g, vec);
  if (r.bound_value && r.error_norm) out["bound_holds"] = r.bound_holds();
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Worst-case risk certification for semilinear mean estimators"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a scenario distribution");
  std::string process;
  std::string gen_config;
  std::string gen_out;
  std::string points_out;
  gen->add_option("--process", process, "Sampling process")
      ->required()
      ->check(CLI::IsMember({"importance", "snowball", "selective"}));
  gen->add_option("--config", gen_config, "Process configuration JSON")->required()->check(CLI::ExistingFile);
  gen->add_option("--out", gen_out, "Output distribution JSON")->required();
  gen->add_option("--points-out", points_out, "Snowball population coordinates CSV");

  // audit
  auto* aud = app.add_subcommand("audit", "Certify the worst-case error of an estimator");
  std::string dist_path;
  std::string est_path;
  std::string audit_out;
  bool exact = false;
  int rounds = 1000;
  std::uint64_t seed = 0;
  aud->add_option("--dist", dist_path, "Distribution JSON")->required()->check(CLI::ExistingFile);
  aud->add_option("--estimator", est_path, "Estimator JSON")->required()->check(CLI::ExistingFile);
  aud->add_flag("--exact", exact, "Also compute the exact worst case (n <= 22)");
  aud->add_option("--rounds", rounds, "Hyperplane roundings")->check(CLI::PositiveNumber);
  aud->add_option("--seed", seed, "Rounding seed");
  aud->add_option("--out", audit_out, "Report JSON (default stdout)");

  // solve
  auto* sol = app.add_subcommand("solve", "Design a near-optimal estimator for a distribution");
  std::string solve_dist;
  std::string solve_out;
  std::string bound_out;
  double floor = kDefaultDesignFloor;
  double rel_tol = 1e-6;
  sol->add_option("--dist", solve_dist, "Distribution JSON")->required()->check(CLI::ExistingFile);
  sol->add_option("--out", solve_out, "Estimator JSON")->required();
  sol->add_option("--bound-out", bound_out, "Bound JSON");
  sol->add_option("--eig-floor", floor, "Eigenvalue floor")->check(CLI::Range(0.0, 0.999999));
  sol->add_option("--rel-tol", rel_tol, "Certified relative gap")->check(CLI::PositiveNumber);

  // predict
  auto* pred = app.add_subcommand("predict", "Estimate one query from sampled scenarios");
  std::string samples_path;
  std::string query_path;
  double eps = 1e-3;
  pred->add_option("--samples", samples_path, "Sampled scenarios JSON")->required()->check(CLI::ExistingFile);
  pred->add_option("--query", query_path, "Query JSON")->required()->check(CLI::ExistingFile);
  pred->add_option("--eps", eps, "Eigenvalue floor, > 0")->check(CLI::Range(1e-12, 0.999999));

  // regress
  auto* reg = app.add_subcommand("regress", "Estimate target-set regression coefficients");
  std::string reg_dist;
  std::string data_path;
  std::string reg_query;
  std::string reg_out;
  bool known = false;
  double delta = 0.2;
  reg->add_option("--dist", reg_dist, "Distribution JSON")->required()->check(CLI::ExistingFile);
  reg->add_option("--data", data_path, "CSV: n rows, d features then the label")->required()->check(CLI::ExistingFile);
  reg->add_option("--query", reg_query, "Query JSON (x_A is ignored)")->required()->check(CLI::ExistingFile);
  reg->add_flag("--known-features", known, "Target features are known");
  reg->add_option("--delta", delta, "Failure probability")->check(CLI::Range(1e-9, 0.999999));
  reg->add_option("--out", reg_out, "Report JSON (default stdout)");

  // experiment
  auto* exp = app.add_subcommand("experiment", "Run an experiment sweep");
  std::string spec_path;
  std::string out_dir;
  exp->add_option("--spec", spec_path, "Experiment spec JSON")->required()->check(CLI::ExistingFile);
  exp->add_option("--out-dir", out_dir, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      save_distribution(generate(process, read_json(gen_config), points_out), gen_out);
    } else if (aud->parsed()) {
      const auto dist = load_distribution(dist_path);
      const auto est = load_estimator(est_path);
      AuditConfig cfg;
      cfg.exact = exact;
      cfg.num_rounds = rounds;
      cfg.rng_seed = seed;
      emit(audit_report_to_json(audit(est, dist, cfg)), audit_out);
    } else if (sol->parsed()) {
      const auto dist = load_distribution(solve_dist);
      SolverConfig cfg = design_config();
      cfg.eig_floor = floor;
      cfg.rel_tol = rel_tol;
      const FullSolution full = solve_full(dist, cfg);
      save_estimator(full.estimator, solve_out);
      if (!bound_out.empty()) {
        write_json({{"sdp_bound", full.sdp_bound},
                    {"residual", full.residual},
                    {"iterations", full.iterations},
                    {"eig_floor", full.eig_floor}},
                   bound_out);
      }
    } else if (pred->parsed()) {
      const auto samples = load_distribution(samples_path);
      const auto query = load_query(query_path);
      std::cout << std::setprecision(17) << estimate_sampled(samples, query, eps) << '\n';
    } else if (reg->parsed()) {
      const auto dist = load_distribution(reg_dist);
      const auto query = load_query(reg_query);
      const Eigen::MatrixXd table = load_csv_matrix(data_path);
      if (table.cols() < 2) throw Error(ErrorCode::kMalformedSchema, "data needs features and a label");
      LabeledData data{table.leftCols(table.cols() - 1), table.col(table.cols() - 1)};
      const RegressionDesign design = regression_design(dist);
      const RegressionReport r = known ? fit_known_features(design, query.sample, query.target, data, delta)
                                       : fit(design, query.sample, query.target, data, delta);
      emit(report_json(r), reg_out);
    } else if (exp->parsed()) {
      const ExperimentSpec spec = spec_from_json(read_json(spec_path));
      write_results(run_experiment(spec), out_dir);
    }
  } catch (const SolverError& e) {
    std::cerr << "wcrc: " << e.what() << '\n';
    return kNotConverged;
  } catch (const Error& e) {
    std::cerr << "wcrc: " << e.what() << '\n';
    return kFailure;
  }
  return kOk;
}
