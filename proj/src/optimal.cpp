#include "wcrc/optimal.hpp"

#include "wcrc/error.hpp"

#include <algorithm>
#include <random>

namespace wcrc {

SolverConfig design_config() {
  SolverConfig cfg;
  cfg.eig_floor = kDefaultDesignFloor;
  return cfg;
}

SparseVector weights_from_certificate(const Eigen::MatrixXd& V, const IndexSet& sample,
                                      const IndexSet& target) {
  const Index n = V.rows();
  const SparseVector b = make_target_vector(target, n);
  const IndexSet A = normalize_index_set(sample, n);
  const Eigen::VectorXd a = schur_weights(V, A, b.dense());
  std::vector<WeightEntry> entries;
  entries.reserve(A.size());
  for (Index j : A) entries.push_back({j, a[j]});
  return SparseVector(n, std::move(entries));
}

FullSolution solve_full(const ScenarioDistribution& dist, const SolverConfig& cfg) {
  SpectralSolution sol = solve_schur(dist, cfg);
  std::vector<SparseVector> weights;
  weights.reserve(dist.size());
  for (const auto& s : dist.scenarios()) {
    weights.push_back(weights_from_certificate(sol.V, s.sample(), s.target()));
  }
  return FullSolution{
      SemilinearEstimator(dist.population_size(), std::move(weights), std::move(sol.V)),
      sol.objective, sol.residual, sol.iterations, cfg.eig_floor};
}

void SamplingRunConfig::validate() const {
  if (t < 1) throw Error(ErrorCode::kInvalidArgument, "t must be at least 1");
  if (!(eps > 0.0 && eps < 1.0)) throw Error(ErrorCode::kInvalidArgument, "eps must lie in (0, 1)");
}

ScenarioDistribution sample_scenarios(const ScenarioDistribution& dist, const SamplingRunConfig& cfg) {
  cfg.validate();
  std::vector<double> probs;
  probs.reserve(dist.size());
  for (const auto& s : dist.scenarios()) probs.push_back(s.probability());
  std::discrete_distribution<std::size_t> pick(probs.begin(), probs.end());
  std::mt19937_64 rng(cfg.rng_seed);
  std::vector<std::pair<IndexSet, IndexSet>> pairs;
  pairs.reserve(static_cast<std::size_t>(cfg.t));
  for (int i = 0; i < cfg.t; ++i) {
    const Scenario& s = dist[pick(rng)];
    pairs.emplace_back(s.sample(), s.target());
  }
  return ScenarioDistribution::uniform(dist.population_size(), pairs, dist.provenance());
}

SpectralSolution design_sampled(const ScenarioDistribution& samples, double eps,
                                const SolverConfig& solver) {
  if (!(eps > 0.0 && eps < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "sampled design needs a floor eps in (0, 1)");
  }
  SolverConfig cfg = solver;
  cfg.eig_floor = eps;
  return solve_schur(samples, cfg);
}

void validate_query(const QueryInstance& query, Index n) {
  const IndexSet A = normalize_index_set(query.sample, n);
  normalize_index_set(query.target, n);
  if (query.target.empty()) throw Error(ErrorCode::kDegenerateTarget, "query target is empty");
  IndexSet seen;
  for (const auto& o : query.observed) {
    if (!(std::abs(o.value) <= 1.0 + 1e-12)) {
      throw Error(ErrorCode::kInvalidArgument, "observed values must satisfy |x| <= 1");
    }
    seen.push_back(o.index);
  }
  std::sort(seen.begin(), seen.end());
  if (seen != A) {
    throw Error(ErrorCode::kMissingObservation, "observations must cover exactly the sample set");
  }
}

double estimate_sampled(const ScenarioDistribution& samples, const QueryInstance& query,
                        double eps, const SolverConfig& solver) {
  validate_query(query, samples.population_size());
  const SpectralSolution sol = design_sampled(samples, eps, solver);
  return apply_weights(weights_from_certificate(sol.V, query.sample, query.target), query.observed);
}

AuditReport worst_case_of_returned(const FullSolution& solution, const ScenarioDistribution& dist,
                                   const AuditConfig& cfg) {
  AuditReport report = audit(solution.estimator, dist, cfg);
  const double tol = cfg.tol + solution.residual + report.solver_residual + solution.eig_floor;
  if (report.exact_value && *report.exact_value > solution.sdp_bound + tol) {
    throw Error(ErrorCode::kInvariantViolation,
                "worst case of the returned estimator exceeds its design bound");
  }
  return report;
}

}  // namespace wcrc
