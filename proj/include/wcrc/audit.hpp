#pragma once

// Worst-case expected squared error of a fixed semilinear estimator.
//
// With M = sum_i p_i (a_i - b_i)(a_i - b_i)^T the worst case over |x_j| <= 1
// is max_{x in {-1,1}^n} x^T M x. It is computed exactly for small n, bounded
// above by the spectahedron relaxation, and bounded below by hyperplane
// rounding of the relaxation's optimum.

#include "wcrc/estimators.hpp"
#include "wcrc/sdp.hpp"

#include <optional>

namespace wcrc {

/// Symmetric PSD quadratic form.
class QuadraticFormMatrix {
 public:
  /// Throws unless symmetric within 1e-10 and min eigenvalue >= -1e-8.
  explicit QuadraticFormMatrix(Eigen::MatrixXd M);

  const Eigen::MatrixXd& matrix() const noexcept { return M_; }
  Index size() const noexcept { return M_.rows(); }
  double value(const Eigen::VectorXd& x) const { return x.dot(M_ * x); }

 private:
  Eigen::MatrixXd M_;
};

QuadraticFormMatrix build_M(std::span<const SparseVector> weights, const ScenarioDistribution& dist);

inline QuadraticFormMatrix build_M(const SemilinearEstimator& est, const ScenarioDistribution& dist) {
  est.check_against(dist);
  return build_M(est.weights(), dist);
}

inline constexpr Index kDefaultExactThreshold = 22;

struct ExactWorstCase {
  double value = 0.0;
  Eigen::VectorXd witness;
};

/// Brute force over sign vectors (x and -x are folded together).
ExactWorstCase exact_worst_case(const QuadraticFormMatrix& M,
                                Index threshold = kDefaultExactThreshold);

/// Relaxation optimum; the floor in `cfg` is ignored (always 0).
SpectralSolution sdp_upper_bound(const QuadraticFormMatrix& M, const SolverConfig& cfg = {});

/// Eigenvalues of V below this fraction of the largest are dropped before
/// rounding.
inline constexpr double kRoundingRankCutoff = 1e-6;

struct RoundingResult {
  Eigen::VectorXd best_x;
  double best_value = 0.0;
  /// Expected x^T M x under hyperplane rounding, in closed form.
  double closed_form = 0.0;
  double mc_mean = 0.0;
  double mc_stderr = 0.0;
  int rounds = 0;
};

RoundingResult round_certificate(const Eigen::MatrixXd& V, const QuadraticFormMatrix& M,
                                 std::uint64_t rng_seed, int num_rounds);

struct AuditConfig {
  SolverConfig solver;
  /// Compute the exact value when n <= exact_threshold.
  bool exact = true;
  Index exact_threshold = kDefaultExactThreshold;
  int num_rounds = 1000;
  std::uint64_t rng_seed = 0;
  double tol = 1e-6;
};

struct AuditReport {
  double sdp_upper = 0.0;
  double rounding_lower = 0.0;
  std::optional<double> exact_value;
  std::optional<Eigen::VectorXd> witness_x;
  double solver_residual = 0.0;
  /// Best value found among the roundings (a valid lower bound).
  double best_rounded = 0.0;
};

/// Checks the report's sandwich invariants, throwing kInvariantViolation.
void check_report(const AuditReport& report, double tol);

AuditReport audit(const QuadraticFormMatrix& M, const AuditConfig& cfg = {});

inline AuditReport audit(const SemilinearEstimator& est, const ScenarioDistribution& dist,
                         const AuditConfig& cfg = {}) {
  return audit(build_M(est, dist), cfg);
}

}  // namespace wcrc
