#include "wcrc/regression.hpp"

#include "wcrc/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace wcrc {

namespace {

void check_data(const LabeledData& data, const IndexSet& sample, double delta) {
  if (data.dims() < 1) throw Error(ErrorCode::kInvalidArgument, "need at least one feature");
  if (data.labels.size() != data.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "features and labels differ in length");
  }
  if (!(delta > 0.0 && delta < 1.0)) throw Error(ErrorCode::kInvalidArgument, "delta must lie in (0, 1)");
  for (Index j : sample) {
    if (!(data.features.row(j).cwiseAbs().maxCoeff() <= 1.0 + 1e-12) ||
        !(std::abs(data.labels[j]) <= 1.0 + 1e-12)) {
      throw Error(ErrorCode::kInvalidArgument, "sampled features and labels must lie in [-1, 1]");
    }
  }
}

bool rows_known(const LabeledData& data, const IndexSet& rows, bool with_labels) {
  for (Index j : rows) {
    if (!data.features.row(j).allFinite()) return false;
    if (with_labels && !std::isfinite(data.labels[j])) return false;
  }
  return true;
}

Eigen::MatrixXd target_covariance(const LabeledData& data, const IndexSet& target) {
  const Eigen::MatrixXd X = data.features(target, Eigen::all);
  return X.transpose() * X / static_cast<double>(target.size());
}

double smallest_singular_value(const Eigen::MatrixXd& Q) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Q);
  return svd.singularValues().minCoeff();
}

Eigen::VectorXd solve_coefficients(const Eigen::MatrixXd& Q, const Eigen::VectorXd& u,
                                   double sigma_min) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Q, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const double smax = svd.singularValues().maxCoeff();
  if (!(sigma_min > kPinvCutoff * smax) || smax == 0.0) {
    std::ostringstream msg;
    msg << "ill-conditioned target covariance (sigma_min " << sigma_min << ")";
    throw Error(ErrorCode::kIllConditioned, msg.str());
  }
  return svd.solve(u);
}

RegressionReport fit_impl(const RegressionDesign& design, const IndexSet& sample_in,
                          const IndexSet& target_in, const LabeledData& data, double delta,
                          bool known_features) {
  const Index n = design.V.rows();
  if (data.size() != n) throw Error(ErrorCode::kDimensionMismatch, "data must have n rows");
  const IndexSet sample = normalize_index_set(sample_in, n);
  const IndexSet target = normalize_index_set(target_in, n);
  if (target.empty()) throw Error(ErrorCode::kDegenerateTarget, "target is empty");
  check_data(data, sample, delta);
  const Index d = data.dims();

  const SparseVector a = weights_from_certificate(design.V, sample, target);
  // Estimates of E_B[x x^T] and E_B[x y]: the same weights applied entrywise.
  Eigen::MatrixXd Q_est = Eigen::MatrixXd::Zero(d, d);
  Eigen::VectorXd u_est = Eigen::VectorXd::Zero(d);
  for (const auto& e : a.entries()) {
    const Eigen::VectorXd x = data.features.row(e.index).transpose();
    Q_est.noalias() += e.weight * x * x.transpose();
    u_est += e.weight * data.labels[e.index] * x;
  }

  RegressionReport r;
  r.known_features = known_features;
  r.alpha = design.alpha;
  r.delta = delta;
  const bool features_known = rows_known(data, target, false);
  std::optional<Eigen::MatrixXd> Q_true;
  if (features_known) Q_true = target_covariance(data, target);
  if (known_features) {
    if (!Q_true) throw Error(ErrorCode::kMissingObservation, "target features must be known");
    r.Q_hat = *Q_true;
  } else {
    r.Q_hat = 0.5 * (Q_est + Q_est.transpose());
  }
  r.u_hat = u_est;
  r.sigma_min_q_hat = smallest_singular_value(r.Q_hat);
  r.beta_hat = solve_coefficients(r.Q_hat, r.u_hat, r.sigma_min_q_hat);

  if (Q_true) {
    const double sigma_d = smallest_singular_value(*Q_true);
    r.sigma_d_true = sigma_d;
    r.bound_value = known_features ? known_features_bound(r.alpha, d, delta, sigma_d)
                                   : regression_bound(r.alpha, d, delta, sigma_d);
    r.F = r.Q_hat - *Q_true;
  }
  if (auto beta = least_squares_on_target(data, target)) {
    r.beta_true = *beta;
    r.error_norm = (r.beta_hat - *beta).norm();
    const Eigen::MatrixXd X = data.features(target, Eigen::all);
    const Eigen::VectorXd u_true =
        X.transpose() * data.labels(target) / static_cast<double>(target.size());
    r.g = r.u_hat - u_true;
  }
  return r;
}

}  // namespace

RegressionDesign regression_design(const ScenarioDistribution& dist, const DesignOptions& opts) {
  SpectralSolution sol;
  if (opts.mode == DesignMode::kFullInformation) {
    sol = solve_schur(dist, opts.solver);
  } else {
    sol = design_sampled(sample_scenarios(dist, opts.sampling), opts.sampling.eps, opts.solver);
  }
  // Certified upper bound, so tiny negative objectives never reach the sqrt.
  return {std::move(sol.V), std::max(0.0, sol.upper_bound()), sol.residual};
}

bool RegressionReport::admissible() const {
  if (known_features) return bound_value.has_value();
  return bound_value && *bound_value <= kRegressionProviso;
}

bool RegressionReport::bound_holds() const {
  // beta_hat and beta come from different solves; allow for their rounding.
  return bound_value && error_norm && *error_norm <= *bound_value + kBoundCompareTol;
}

double regression_bound(double alpha, Index d, double delta, double sigma_d) {
  const double dd = static_cast<double>(d);
  return 3.0 * std::sqrt(alpha * dd * dd * dd / delta) / (sigma_d * sigma_d);
}

double known_features_bound(double alpha, Index d, double delta, double sigma_d) {
  return std::sqrt(alpha * static_cast<double>(d) / delta) / sigma_d;
}

RegressionReport fit(const RegressionDesign& design, const IndexSet& sample, const IndexSet& target,
                     const LabeledData& data, double delta) {
  return fit_impl(design, sample, target, data, delta, false);
}

RegressionReport fit_known_features(const RegressionDesign& design, const IndexSet& sample,
                                    const IndexSet& target, const LabeledData& data, double delta) {
  return fit_impl(design, sample, target, data, delta, true);
}

std::optional<Eigen::VectorXd> least_squares_on_target(const LabeledData& data,
                                                       const IndexSet& target) {
  if (target.empty() || !rows_known(data, target, true)) return std::nullopt;
  const Eigen::MatrixXd Q = target_covariance(data, target);
  const Eigen::MatrixXd X = data.features(target, Eigen::all);
  const Eigen::VectorXd u =
      X.transpose() * data.labels(target) / static_cast<double>(target.size());
  return Eigen::VectorXd(Q.completeOrthogonalDecomposition().solve(u));
}

}  // namespace wcrc
