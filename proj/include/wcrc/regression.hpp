#pragma once

// Least-squares coefficients of a target set, estimated by applying one set
// of semilinear mean-estimation weights to every entry of x x^T and x y.

#include "wcrc/optimal.hpp"

#include <optional>

namespace wcrc {

struct LabeledData {
  /// n x d, entries in [-1, 1]. Rows outside the sample set may hold NaN
  /// when unknown; they are only read for evaluation.
  Eigen::MatrixXd features;
  /// n labels in [-1, 1], NaN allowed outside the sample set.
  Eigen::VectorXd labels;

  Index size() const noexcept { return features.rows(); }
  Index dims() const noexcept { return features.cols(); }
};

enum class DesignMode { kFullInformation, kSampled };

/// The V that produces the mean-estimation weights, plus its error bound.
struct RegressionDesign {
  Eigen::MatrixXd V;
  /// Worst-case MSE bound of the scalar mean estimator: the certified SDP
  /// upper bound, floored at zero.
  double alpha = 0.0;
  double residual = 0.0;
};

struct DesignOptions {
  DesignMode mode = DesignMode::kFullInformation;
  SolverConfig solver = design_config();
  /// Used in sampled mode.
  SamplingRunConfig sampling;
};

RegressionDesign regression_design(const ScenarioDistribution& dist, const DesignOptions& opts = {});

struct RegressionReport {
  Eigen::VectorXd beta_hat;
  Eigen::MatrixXd Q_hat;
  Eigen::VectorXd u_hat;
  double alpha = 0.0;
  double delta = 0.0;
  double sigma_min_q_hat = 0.0;
  bool known_features = false;

  // Filled when the target rows are fully known.
  std::optional<Eigen::VectorXd> beta_true;
  std::optional<double> sigma_d_true;
  std::optional<double> error_norm;
  std::optional<double> bound_value;
  /// Q_hat - Q and u_hat - u.
  std::optional<Eigen::MatrixXd> F;
  std::optional<Eigen::VectorXd> g;

  /// The full-feature bound's hypothesis: bound_value <= 0.08.
  bool admissible() const;
  bool bound_holds() const;
};

inline constexpr double kRegressionProviso = 0.08;
/// Absolute slack when comparing the realized error with its bound.
inline constexpr double kBoundCompareTol = 1e-9;

/// 3 sqrt(alpha d^3 / delta) / sigma_d^2.
double regression_bound(double alpha, Index d, double delta, double sigma_d);
/// sqrt(alpha d / delta) / sigma_d.
double known_features_bound(double alpha, Index d, double delta, double sigma_d);

RegressionReport fit(const RegressionDesign& design, const IndexSet& sample, const IndexSet& target,
                     const LabeledData& data, double delta);

/// Q computed from the target rows' features; only u is estimated.
RegressionReport fit_known_features(const RegressionDesign& design, const IndexSet& sample,
                                    const IndexSet& target, const LabeledData& data, double delta);

/// (E_B[x x^T])^{-1} E_B[x y]; nullopt when any target row is unknown.
std::optional<Eigen::VectorXd> least_squares_on_target(const LabeledData& data,
                                                       const IndexSet& target);

}  // namespace wcrc
