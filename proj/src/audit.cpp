#include "wcrc/audit.hpp"

#include "wcrc/error.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <random>

namespace wcrc {

QuadraticFormMatrix::QuadraticFormMatrix(Eigen::MatrixXd M) : M_(std::move(M)) {
  if (M_.rows() != M_.cols()) throw Error(ErrorCode::kDimensionMismatch, "M must be square");
  if (M_.size() == 0) return;
  if ((M_ - M_.transpose()).cwiseAbs().maxCoeff() > 1e-10) {
    throw Error(ErrorCode::kInvariantViolation, "M is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(M_, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -1e-8) {
    throw Error(ErrorCode::kInvariantViolation, "M is not positive semidefinite");
  }
}

QuadraticFormMatrix build_M(std::span<const SparseVector> weights, const ScenarioDistribution& dist) {
  if (weights.size() != dist.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "one weight vector per scenario required");
  }
  const Index n = dist.population_size();
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd d(n);
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (weights[i].dim() != n) throw Error(ErrorCode::kDimensionMismatch, "weight dimension != n");
    d = weights[i].dense() - dist[i].target_weights().dense();
    M.selfadjointView<Eigen::Lower>().rankUpdate(d, dist[i].probability());
  }
  M.triangularView<Eigen::StrictlyUpper>() = M.transpose();
  return QuadraticFormMatrix(std::move(M));
}

ExactWorstCase exact_worst_case(const QuadraticFormMatrix& Mq, Index threshold) {
  const Eigen::MatrixXd& M = Mq.matrix();
  const Index n = M.rows();
  if (n > threshold) {
    throw Error(ErrorCode::kThresholdExceeded,
                "n = " + std::to_string(n) + " exceeds the exact threshold " +
                    std::to_string(threshold) + "; use SDP bound");
  }
  if (n == 0) return {0.0, Eigen::VectorXd()};

  // Gray-code walk over the first n-1 signs with x_{n-1} = +1 fixed. Flipping
  // x_j changes x^T M x by -4 x_j (Mx)_j + 4 M_jj.
  Eigen::VectorXd x = Eigen::VectorXd::Ones(n);
  Eigen::VectorXd y = M * x;
  double value = x.dot(y);
  double best = value;
  std::uint64_t best_code = 0;
  const std::uint64_t count = std::uint64_t{1} << (n - 1);
  std::uint64_t code = 0;
  for (std::uint64_t step = 1; step < count; ++step) {
    const int j = std::countr_zero(step);
    code ^= std::uint64_t{1} << j;
    const double xj = x[j];
    value += -4.0 * xj * y[j] + 4.0 * M(j, j);
    y.noalias() -= (2.0 * xj) * M.col(j);
    x[j] = -xj;
    if (value > best) {
      best = value;
      best_code = code;
    }
  }
  ExactWorstCase out;
  out.witness = Eigen::VectorXd::Ones(n);
  for (Index j = 0; j + 1 < n; ++j) {
    if ((best_code >> j) & 1U) out.witness[j] = -1.0;
  }
  out.value = Mq.value(out.witness);
  return out;
}

SpectralSolution sdp_upper_bound(const QuadraticFormMatrix& M, const SolverConfig& cfg) {
  SolverConfig c = cfg;
  c.eig_floor = 0.0;
  return solve_linear(M.matrix(), c);
}

RoundingResult round_certificate(const Eigen::MatrixXd& V, const QuadraticFormMatrix& Mq,
                                 std::uint64_t rng_seed, int num_rounds) {
  const Eigen::MatrixXd& M = Mq.matrix();
  const Index n = M.rows();
  if (V.rows() != n || V.cols() != n) throw Error(ErrorCode::kDimensionMismatch, "V and M differ");
  if (num_rounds < 1) throw Error(ErrorCode::kInvalidArgument, "num_rounds must be positive");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(V);
  if (eig.info() != Eigen::Success) {
    throw Error(ErrorCode::kFactorizationFailure, "eigendecomposition of V failed");
  }
  const double scale = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
  if (eig.eigenvalues().minCoeff() < -1e-8 * scale) {
    throw Error(ErrorCode::kFactorizationFailure, "V is indefinite");
  }
  // Columns of W are the Gram vectors: V = W^T W. Directions far below the
  // top eigenvalue are solver noise; keeping them would create sign flips too
  // rare to sample yet visible in the closed form.
  const double cutoff = kRoundingRankCutoff * std::max(0.0, eig.eigenvalues().maxCoeff());
  Eigen::VectorXd lambda = eig.eigenvalues();
  for (Index j = 0; j < n; ++j) lambda(j) = lambda(j) > cutoff ? std::sqrt(lambda(j)) : 0.0;
  Eigen::MatrixXd W = lambda.asDiagonal() * eig.eigenvectors().transpose();
  std::vector<bool> zero(static_cast<std::size_t>(n), false);
  for (Index j = 0; j < n; ++j) {
    const double nrm = W.col(j).norm();
    if (nrm <= 1e-12) {
      zero[static_cast<std::size_t>(j)] = true;
      W.col(j).setZero();
    } else {
      W.col(j) /= nrm;
    }
  }

  RoundingResult out;
  Eigen::MatrixXd Vn = W.transpose() * W;
  double closed = 0.0;
  for (Index j = 0; j < n; ++j) {
    for (Index k = 0; k < n; ++k) {
      double c = j == k ? 1.0 : std::clamp(Vn(j, k), -1.0, 1.0);
      // Parallel columns always round together.
      if (1.0 - std::abs(c) <= 1e-12) c = c > 0 ? 1.0 : -1.0;
      closed += M(j, k) * (1.0 - (2.0 / std::numbers::pi) * std::acos(c));
    }
  }
  out.closed_form = closed;

  std::mt19937_64 rng(rng_seed);
  std::normal_distribution<double> gauss;
  std::bernoulli_distribution coin(0.5);
  Eigen::VectorXd r(n);
  Eigen::VectorXd x(n);
  double sum = 0.0;
  double sum_sq = 0.0;
  out.best_value = -std::numeric_limits<double>::infinity();
  for (int round = 0; round < num_rounds; ++round) {
    for (Index j = 0; j < n; ++j) r[j] = gauss(rng);
    const Eigen::VectorXd proj = W.transpose() * r;
    for (Index j = 0; j < n; ++j) {
      if (zero[static_cast<std::size_t>(j)]) {
        x[j] = coin(rng) ? 1.0 : -1.0;
      } else {
        x[j] = proj[j] >= 0.0 ? 1.0 : -1.0;
      }
    }
    const double v = Mq.value(x);
    sum += v;
    sum_sq += v * v;
    if (v > out.best_value) {
      out.best_value = v;
      out.best_x = x;
    }
  }
  const double rounds = static_cast<double>(num_rounds);
  out.rounds = num_rounds;
  out.mc_mean = sum / rounds;
  const double var = num_rounds > 1 ? std::max(0.0, (sum_sq - rounds * out.mc_mean * out.mc_mean) /
                                                        (rounds - 1.0))
                                    : 0.0;
  out.mc_stderr = std::sqrt(var / rounds);
  return out;
}

void check_report(const AuditReport& r, double tol) {
  const double t = tol + r.solver_residual;
  constexpr double kHalfPi = std::numbers::pi / 2.0;
  auto require = [](bool ok, const char* what) {
    if (!ok) throw Error(ErrorCode::kInvariantViolation, what);
  };
  require(r.rounding_lower <= r.sdp_upper + t, "rounding expectation exceeds the SDP bound");
  require(r.rounding_lower >= r.sdp_upper / kHalfPi - t, "rounding below 2/pi of the SDP bound");
  if (r.exact_value) {
    require(*r.exact_value <= r.sdp_upper + t, "exact value exceeds the SDP bound");
    require(r.sdp_upper <= kHalfPi * *r.exact_value + t, "SDP bound exceeds pi/2 times exact");
  }
}

AuditReport audit(const QuadraticFormMatrix& M, const AuditConfig& cfg) {
  const SpectralSolution sol = sdp_upper_bound(M, cfg.solver);
  AuditReport report;
  report.sdp_upper = sol.upper_bound();
  report.solver_residual = sol.residual;
  const RoundingResult rounding = round_certificate(sol.V, M, cfg.rng_seed, cfg.num_rounds);
  report.rounding_lower = rounding.closed_form;
  report.best_rounded = rounding.best_value;
  if (cfg.exact && M.size() <= cfg.exact_threshold) {
    ExactWorstCase ex = exact_worst_case(M, cfg.exact_threshold);
    report.exact_value = ex.value;
    report.witness_x = std::move(ex.witness);
  }
  check_report(report, cfg.tol);
  return report;
}

}  // namespace wcrc
