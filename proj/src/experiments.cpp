#include "wcrc/experiments.hpp"

#include "wcrc/error.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <tuple>

namespace wcrc {

namespace {

constexpr const char* kSdpAlg = "SDP Alg";
constexpr const char* kWorstCase = "worst-case";

SolverConfig solver_from_json(const Json& j, SolverConfig cfg) {
  if (!j.is_object()) throw Error(ErrorCode::kMalformedSchema, "'solver' must be an object");
  cfg.eig_floor = j.value("eig_floor", cfg.eig_floor);
  cfg.rel_tol = j.value("rel_tol", cfg.rel_tol);
  cfg.max_iters = j.value("max_iters", cfg.max_iters);
  cfg.rng_seed = j.value("rng_seed", cfg.rng_seed);
  return cfg;
}

Json solver_to_json(const SolverConfig& cfg) {
  return {{"eig_floor", cfg.eig_floor},
          {"rel_tol", cfg.rel_tol},
          {"max_iters", cfg.max_iters},
          {"rng_seed", cfg.rng_seed}};
}

double worst_case_bound(const SemilinearEstimator& est, const ScenarioDistribution& dist,
                        const ExperimentSpec& spec) {
  return audit(est, dist, spec.audit).sdp_upper;
}

std::string artifact_name(const std::string& experiment, const std::string& estimator, Index sweep) {
  std::string name = experiment + "_" + estimator + "_" + std::to_string(sweep);
  std::replace_if(name.begin(), name.end(), [](char c) { return c == ' ' || c == '/'; }, '-');
  return name;
}

}  // namespace

void ExperimentSpec::validate() const {
  if (experiment != "table1" && experiment != "snowball" && experiment != "selective") {
    throw Error(ErrorCode::kInvalidArgument, "unknown experiment '" + experiment + "'");
  }
  if (experiment != "table1") {
    if (sweep.empty()) throw Error(ErrorCode::kInvalidArgument, "sweep must be non-empty");
    if (!std::is_sorted(sweep.begin(), sweep.end())) {
      throw Error(ErrorCode::kInvalidArgument, "sweep must be sorted");
    }
  }
  if (num_scenarios <= 0) throw Error(ErrorCode::kInvalidArgument, "num_scenarios must be positive");
  solver.validate();
}

ExperimentSpec default_spec(const std::string& experiment) {
  ExperimentSpec spec;
  spec.experiment = experiment;
  if (experiment == "table1") {
    spec.num_scenarios = 2000;
  } else if (experiment == "snowball") {
    spec.num_scenarios = 1000;
    spec.sweep = {5, 10, 15, 20, 25, 30};
  } else if (experiment == "selective") {
    spec.sweep = {8, 16, 32, 64};
  } else {
    throw Error(ErrorCode::kInvalidArgument, "unknown experiment '" + experiment + "'");
  }
  return spec;
}

ExperimentSpec spec_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("experiment") || !j.at("experiment").is_string()) {
    throw Error(ErrorCode::kMalformedSchema, "spec needs a string field 'experiment'");
  }
  ExperimentSpec spec = default_spec(j.at("experiment").get<std::string>());
  try {
    spec.seed = j.value("seed", spec.seed);
    spec.num_scenarios = j.value("num_scenarios", spec.num_scenarios);
    spec.sweep = j.value("sweep", spec.sweep);
    spec.population = j.value("population", spec.population);
    spec.neighbor_count = j.value("neighbor_count", spec.neighbor_count);
    spec.recruits_per_node = j.value("recruits_per_node", spec.recruits_per_node);
    spec.enumerate = j.value("enumerate", spec.enumerate);
    if (j.contains("solver")) spec.solver = solver_from_json(j.at("solver"), spec.solver);
    if (j.contains("audit")) {
      const Json& a = j.at("audit");
      if (a.contains("solver")) spec.audit.solver = solver_from_json(a.at("solver"), spec.audit.solver);
      spec.audit.num_rounds = a.value("num_rounds", spec.audit.num_rounds);
      spec.audit.exact = a.value("exact", spec.audit.exact);
      spec.audit.rng_seed = a.value("rng_seed", spec.audit.rng_seed);
    }
  } catch (const Json::type_error& e) {
    throw Error(ErrorCode::kMalformedSchema, e.what());
  }
  spec.validate();
  return spec;
}

Json spec_to_json(const ExperimentSpec& spec) {
  return {{"experiment", spec.experiment},
          {"seed", spec.seed},
          {"num_scenarios", spec.num_scenarios},
          {"sweep", spec.sweep},
          {"population", spec.population},
          {"neighbor_count", spec.neighbor_count},
          {"recruits_per_node", spec.recruits_per_node},
          {"enumerate", spec.enumerate},
          {"solver", solver_to_json(spec.solver)},
          {"audit",
           {{"solver", solver_to_json(spec.audit.solver)},
            {"num_rounds", spec.audit.num_rounds},
            {"exact", spec.audit.exact},
            {"rng_seed", spec.audit.rng_seed}}}};
}

Eigen::VectorXd table1_inclusion_probs(Index n) {
  Eigen::VectorXd p(n);
  for (Index j = 0; j < n; ++j) p[j] = j < n / 2 ? 0.1 : 0.5;
  return p;
}

std::vector<std::pair<std::string, DataValues>> table1_values(Index n) {
  DataValues constant = DataValues::Ones(n);
  DataValues inter(n);
  DataValues intra(n);
  for (Index j = 0; j < n; ++j) {
    inter[j] = j < n / 2 ? 1.0 : -1.0;
    intra[j] = j % 2 == 1 ? 1.0 : -1.0;
  }
  return {{"constant", constant}, {"intergroup", inter}, {"intragroup", intra}};
}

ExperimentResult run_table1(const ExperimentSpec& spec) {
  spec.validate();
  const Index n = spec.population;
  ImportanceConfig icfg{table1_inclusion_probs(n), spec.num_scenarios, spec.seed};
  const ScenarioDistribution dist = gen_importance(icfg);

  IndexSet low;
  IndexSet high;
  for (Index j = 0; j < n; ++j) (j < n / 2 ? low : high).push_back(j);

  std::vector<std::pair<std::string, SemilinearEstimator>> estimators;
  const BaselineKind ht = HorvitzThompson{icfg.inclusion_probs};
  const BaselineKind sub = Subgroup{{low, high}};
  estimators.emplace_back(baseline_name(ht), baseline_estimator(ht, dist));
  estimators.emplace_back(baseline_name(sub), baseline_estimator(sub, dist));
  estimators.emplace_back(kSdpAlg, solve_full(dist, spec.solver).estimator);

  ExperimentResult out;
  const auto values = table1_values(n);
  for (const auto& [name, est] : estimators) {
    for (const auto& [vname, x] : values) {
      out.rows.push_back({spec.experiment, name, vname, mse_on_values(est, dist, x), n, spec.seed});
    }
    out.rows.push_back({spec.experiment, name, kWorstCase, worst_case_bound(est, dist, spec), n,
                        spec.seed});
    out.artifacts.push_back({artifact_name(spec.experiment, name, n), est});
  }
  sort_rows(out.rows);
  return out;
}

ExperimentResult run_snowball(const ExperimentSpec& spec) {
  spec.validate();
  ExperimentResult out;
  for (Index s : spec.sweep) {
    SnowballConfig cfg;
    cfg.num_points = spec.population;
    cfg.neighbor_count = spec.neighbor_count;
    cfg.recruits_per_node = spec.recruits_per_node;
    cfg.sample_size = s;
    cfg.num_scenarios = spec.num_scenarios;
    cfg.rng_seed = spec.seed;
    const auto [pop, dist] = gen_snowball(cfg);
    const DataValues x = spatial_values(pop);

    const SemilinearEstimator mean = baseline_estimator(SampleMean{}, dist);
    const SemilinearEstimator sdp = solve_full(dist, spec.solver).estimator;
    const double mean_spatial = mse_on_values(mean, dist, x);
    const double sdp_spatial = mse_on_values(sdp, dist, x);
    const double mean_wc = worst_case_bound(mean, dist, spec);
    const double sdp_wc = worst_case_bound(sdp, dist, spec);
    const std::string ratio = std::string("SampleMean/") + kSdpAlg;
    out.rows.push_back({spec.experiment, "SampleMean", "spatial", mean_spatial, s, spec.seed});
    out.rows.push_back({spec.experiment, kSdpAlg, "spatial", sdp_spatial, s, spec.seed});
    out.rows.push_back({spec.experiment, "SampleMean", kWorstCase, mean_wc, s, spec.seed});
    out.rows.push_back({spec.experiment, kSdpAlg, kWorstCase, sdp_wc, s, spec.seed});
    out.rows.push_back({spec.experiment, ratio, "spatial", mean_spatial / sdp_spatial, s, spec.seed});
    out.rows.push_back({spec.experiment, ratio, kWorstCase, mean_wc / sdp_wc, s, spec.seed});
    out.artifacts.push_back({artifact_name(spec.experiment, kSdpAlg, s), sdp});
  }
  sort_rows(out.rows);
  return out;
}

ExperimentResult run_selective(const ExperimentSpec& spec) {
  spec.validate();
  ExperimentResult out;
  for (Index n : spec.sweep) {
    SelectiveConfig cfg;
    cfg.n = n;
    cfg.rng_seed = spec.seed;
    cfg.enumerate = spec.enumerate;
    cfg.num_scenarios = spec.num_scenarios;
    const ScenarioDistribution dist = gen_selective(cfg);

    const SemilinearEstimator window = baseline_estimator(RecentWindow{}, dist);
    const SemilinearEstimator sdp = solve_full(dist, spec.solver).estimator;
    const double window_wc = worst_case_bound(window, dist, spec);
    const double sdp_wc = worst_case_bound(sdp, dist, spec);
    out.rows.push_back({spec.experiment, "RecentWindow", kWorstCase, window_wc, n, spec.seed});
    out.rows.push_back({spec.experiment, kSdpAlg, kWorstCase, sdp_wc, n, spec.seed});
    out.rows.push_back({spec.experiment, std::string("RecentWindow/") + kSdpAlg, kWorstCase,
                        window_wc / sdp_wc, n, spec.seed});
    out.artifacts.push_back({artifact_name(spec.experiment, kSdpAlg, n), sdp});
  }
  sort_rows(out.rows);
  return out;
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  if (spec.experiment == "table1") return run_table1(spec);
  if (spec.experiment == "snowball") return run_snowball(spec);
  if (spec.experiment == "selective") return run_selective(spec);
  throw Error(ErrorCode::kInvalidArgument, "unknown experiment '" + spec.experiment + "'");
}

void sort_rows(std::vector<ResultRow>& rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
    return std::tie(a.experiment, a.sweep, a.estimator, a.values) <
           std::tie(b.experiment, b.sweep, b.estimator, b.values);
  });
}

double metric_of(const std::vector<ResultRow>& rows, const std::string& estimator,
                 const std::string& values, Index sweep) {
  for (const auto& r : rows) {
    if (r.estimator == estimator && r.values == values && r.sweep == sweep) return r.metric;
  }
  throw Error(ErrorCode::kInvalidArgument,
              "no row for " + estimator + " / " + values + " at " + std::to_string(sweep));
}

std::string rows_to_csv(const std::vector<ResultRow>& rows) {
  std::ostringstream out;
  out << "experiment,estimator,values,metric,sweep,seed\n" << std::setprecision(17);
  for (const auto& r : rows) {
    out << r.experiment << ',' << r.estimator << ',' << r.values << ',' << r.metric << ','
        << r.sweep << ',' << r.seed << '\n';
  }
  return out.str();
}

std::vector<ResultRow> rows_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  if (line.rfind("experiment,estimator,values,metric,sweep,seed", 0) != 0) {
    throw Error(ErrorCode::kMalformedSchema, "unexpected results header");
  }
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != 6) throw Error(ErrorCode::kMalformedSchema, "bad results row: " + line);
    try {
      rows.push_back({cells[0], cells[1], cells[2], std::stod(cells[3]),
                      static_cast<Index>(std::stoll(cells[4])), std::stoull(cells[5])});
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::kMalformedSchema, "bad results row: " + line);
    }
  }
  return rows;
}

Json rows_to_json(const std::vector<ResultRow>& rows) {
  Json out = Json::array();
  for (const auto& r : rows) {
    out.push_back({{"experiment", r.experiment},
                   {"estimator", r.estimator},
                   {"values", r.values},
                   {"metric", r.metric},
                   {"sweep", r.sweep},
                   {"seed", r.seed}});
  }
  return out;
}

void write_results(const ExperimentResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream csv(dir / "results.csv");
    if (!csv) throw Error(ErrorCode::kIoFailure, "cannot write results.csv");
    csv << rows_to_csv(result.rows);
  }
  write_json(rows_to_json(result.rows), dir / "results.json");
  for (const auto& a : result.artifacts) {
    save_estimator(a.estimator, dir / (a.name + ".estimator.json"));
  }
}

}  // namespace wcrc
