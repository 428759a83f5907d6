#pragma once

// Near-optimal semilinear estimators. solve_full designs weights for every
// scenario of a fully described distribution from one Schur-objective solve;
// estimate_sampled answers a single query from a list of sampled scenarios.

#include "wcrc/audit.hpp"
#include "wcrc/estimators.hpp"
#include "wcrc/io.hpp"
#include "wcrc/sdp.hpp"

namespace wcrc {

/// Solver settings used by solve_full unless overridden: floor 1e-6.
SolverConfig design_config();

struct FullSolution {
  /// Carries the optimal V as its certificate.
  SemilinearEstimator estimator;
  /// Solver objective; upper-bounds the estimator's worst-case error.
  double sdp_bound = 0.0;
  double residual = 0.0;
  int iterations = 0;
  double eig_floor = 0.0;
};

FullSolution solve_full(const ScenarioDistribution& dist, const SolverConfig& cfg = design_config());

/// Weights V_AA^+ V_A b on the sample set for an arbitrary (A, B).
SparseVector weights_from_certificate(const Eigen::MatrixXd& V, const IndexSet& sample,
                                      const IndexSet& target);

struct SamplingRunConfig {
  int t = 1000;
  double eps = 1e-3;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

/// t scenarios drawn i.i.d. from `dist`, each with probability 1/t.
ScenarioDistribution sample_scenarios(const ScenarioDistribution& dist, const SamplingRunConfig& cfg);

/// Schur solve on the sampled scenarios with floor eps > 0. The sample list's
/// own probabilities are used.
SpectralSolution design_sampled(const ScenarioDistribution& samples, double eps,
                                const SolverConfig& solver = {});

/// Throws unless the observations cover exactly the query's sample set and
/// every value satisfies |x| <= 1.
void validate_query(const QueryInstance& query, Index n);

/// x_A^T V_AA^{-1} V_A b with V from design_sampled.
double estimate_sampled(const ScenarioDistribution& samples, const QueryInstance& query,
                        double eps, const SolverConfig& solver = {});

/// Audit of a solve_full estimator that also checks exact <= sdp_bound + tol.
/// The floor costs at most eps in objective, so eps is added to the slack.
AuditReport worst_case_of_returned(const FullSolution& solution, const ScenarioDistribution& dist,
                                   const AuditConfig& cfg = {});

}  // namespace wcrc
