#pragma once

// Concave maximization over the capped spectahedron
//
//     { V symmetric : V >= eps * I,  V_jj <= 1 }
//
// for two objective families:
//   * linear    <M, V>                                       (relaxation bound)
//   * Schur     sum_i p_i b_i^T (V - V_Ai^T V_AiAi^+ V_Ai) b_i  (estimator design)
//
// Both solvers return a certified residual: an upper bound on the distance
// between the returned objective and the true optimum.

#include "wcrc/scenario.hpp"

#include <cstdint>
#include <vector>

namespace wcrc {

struct SolverConfig {
  /// Minimum-eigenvalue floor eps, 0 <= eps < 1.
  double eig_floor = 0.0;
  /// Target certified gap is rel_tol * max(1, |objective|).
  double rel_tol = 1e-6;
  /// Sweeps for the linear solver, Newton steps for the Schur solver.
  int max_iters = 20000;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

/// Default floor used when designing estimators from a full description.
inline constexpr double kDefaultDesignFloor = 1e-6;

/// Relative eigenvalue cutoff for pseudoinverses.
inline constexpr double kPinvCutoff = 1e-10;

struct SpectralSolution {
  Eigen::MatrixXd V;
  double objective = 0.0;
  /// Certified: true optimum <= objective + residual.
  double residual = 0.0;
  int iterations = 0;

  double upper_bound() const { return objective + residual; }
};

/// max <M, V> over the capped spectahedron. M must be symmetric PSD.
SpectralSolution solve_linear(const Eigen::MatrixXd& M, const SolverConfig& cfg = {});

/// Maximizes the probability-weighted Schur objective of `dist`.
SpectralSolution solve_schur(const ScenarioDistribution& dist, const SolverConfig& cfg = {});

/// x = S^+ rhs for symmetric PSD S, eigenvalues below kPinvCutoff * max
/// treated as zero.
Eigen::VectorXd psd_pinv_solve(const Eigen::MatrixXd& S, const Eigen::VectorXd& rhs);

/// Best-response weights a with a_A = V_AA^+ V_A b and zero elsewhere.
Eigen::VectorXd schur_weights(const Eigen::MatrixXd& V, const IndexSet& sample,
                              const Eigen::VectorXd& b);

struct SchurEvaluation {
  double objective = 0.0;
  /// Unweighted per-scenario terms, each in [0, 1] for feasible V.
  std::vector<double> terms;
  /// Symmetric gradient G: d objective = <G, dV> for symmetric dV. It equals
  /// sum_i p_i (a_i - b_i)(a_i - b_i)^T at the best-response weights.
  Eigen::MatrixXd gradient;
};

SchurEvaluation schur_objective(const ScenarioDistribution& dist, const Eigen::MatrixXd& V);

}  // namespace wcrc
