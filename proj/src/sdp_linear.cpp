// Linear objective <M, V> over {V >= eps I, diag(V) <= 1}.
//
// The floor is removed by the affine change V = eps I + (1 - eps) W, which
// maps the feasible set onto {W psd, diag(W) <= 1}. The reduced problem is
// solved by block-coordinate ascent on a Gram factorization W = U^T U with
// unit columns (for PSD M an optimum exists with unit diagonal). Each column
// update u_j <- g_j / |g_j|, g_j = sum_{k != j} M_jk u_k, is an exact block
// maximization. Optimality is certified with the dual
//
//     min sum_j y_j   s.t.  Diag(y) >= M,
//
// evaluated at y_j = (M W)_jj and shifted by the most negative eigenvalue of
// Diag(y) - M so that it is always feasible.

#include "wcrc/error.hpp"
#include "wcrc/sdp.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace wcrc {

void SolverConfig::validate() const {
  if (!(eig_floor >= 0.0 && eig_floor < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "eigenvalue floor must lie in [0, 1)");
  }
  if (!(rel_tol > 0.0)) throw Error(ErrorCode::kInvalidArgument, "rel_tol must be positive");
  if (max_iters <= 0) throw Error(ErrorCode::kInvalidArgument, "max_iters must be positive");
}

namespace {

struct DualCertificate {
  double primal;
  double dual;
};

DualCertificate certify(const Eigen::MatrixXd& M, const Eigen::MatrixXd& W) {
  const Eigen::Index n = M.rows();
  const double primal = M.cwiseProduct(W).sum();
  Eigen::VectorXd y = (M * W).diagonal();
  Eigen::MatrixXd Z = -M;
  Z.diagonal() += y;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Z, Eigen::EigenvaluesOnly);
  const double shift = std::max(0.0, -eig.eigenvalues().minCoeff());
  return {primal, y.sum() + static_cast<double>(n) * shift};
}

void normalize_columns(Eigen::MatrixXd& U) {
  for (Eigen::Index j = 0; j < U.cols(); ++j) {
    const double nrm = U.col(j).norm();
    if (nrm > 0.0) U.col(j) /= nrm;
  }
}

}  // namespace

SpectralSolution solve_linear(const Eigen::MatrixXd& M, const SolverConfig& cfg) {
  cfg.validate();
  if (M.rows() != M.cols()) throw Error(ErrorCode::kDimensionMismatch, "M must be square");
  const Eigen::Index n = M.rows();
  const double scale = n > 0 ? M.cwiseAbs().maxCoeff() : 0.0;
  if (n > 0 && (M - M.transpose()).cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, scale)) {
    throw Error(ErrorCode::kInvalidArgument, "M must be symmetric");
  }
  const double eps = cfg.eig_floor;
  const double rounding_slack =
      16.0 * static_cast<double>(n + 1) * std::numeric_limits<double>::epsilon() * M.cwiseAbs().sum();

  auto lift = [&](const Eigen::MatrixXd& W, const DualCertificate& c, int iters) {
    SpectralSolution out;
    out.V = (1.0 - eps) * W;
    out.V.diagonal().array() += eps;
    out.objective = eps * M.trace() + (1.0 - eps) * c.primal;
    // The gap itself is computed in floating point; pad it by a bound on
    // the rounding error of the sums involved.
    out.residual = std::max(0.0, (1.0 - eps) * (c.dual - c.primal)) + rounding_slack;
    out.iterations = iters;
    return out;
  };

  if (n == 0 || scale == 0.0) {
    Eigen::MatrixXd W = Eigen::MatrixXd::Identity(n, n);
    return lift(W, {0.0, 0.0}, 0);
  }

  constexpr int kCheckEvery = 10;
  constexpr int kRestarts = 3;
  std::mt19937_64 rng(cfg.rng_seed);
  std::normal_distribution<double> gauss;

  Eigen::MatrixXd U = Eigen::MatrixXd::Identity(n, n);
  double last_gap = std::numeric_limits<double>::infinity();
  int total = 0;
  for (int attempt = 0; attempt <= kRestarts; ++attempt) {
    if (attempt > 0) {
      for (Eigen::Index c = 0; c < U.cols(); ++c) {
        for (Eigen::Index r = 0; r < U.rows(); ++r) U(r, c) = gauss(rng);
      }
      normalize_columns(U);
    }
    Eigen::VectorXd g(n);
    for (int sweep = 1; sweep <= cfg.max_iters; ++sweep) {
      for (Eigen::Index j = 0; j < n; ++j) {
        g.noalias() = U * M.col(j);
        g -= M(j, j) * U.col(j);
        const double nrm = g.norm();
        if (nrm > 1e-300) U.col(j) = g / nrm;
      }
      ++total;
      if (sweep % kCheckEvery == 0 || sweep <= 2) {
        Eigen::MatrixXd W = U.transpose() * U;
        W.diagonal().setOnes();
        const DualCertificate cert = certify(M, W);
        last_gap = cert.dual - cert.primal;
        if (last_gap <= cfg.rel_tol * std::max(1.0, std::abs(cert.primal))) {
          return lift(W, cert, total);
        }
      }
    }
  }
  throw SolverError("linear spectahedron solver exhausted its iteration budget", last_gap);
}

}  // namespace wcrc
