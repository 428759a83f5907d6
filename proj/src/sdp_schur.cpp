// Schur objective  f(V) = sum_i p_i min_{a: supp(a) in A_i} (a - b_i)^T V (a - b_i)
// over {V >= eps I, diag(V) <= 1}, solved by a primal log-barrier method:
//
//     maximize  f(V) + mu * ( log det(V - eps I) + sum_j log(1 - V_jj) )
//
// with damped Newton steps in the n(n+1)/2 upper-triangular coordinates.
//
// Derivatives at the best response r_i = b_i - a_i (so (V r_i)_A = 0):
//     df        = sum_i p_i r_i^T dV r_i                    (gradient = M(a))
//     d^2 f     = -2 sum_i p_i w_i^T V_AA^{-1} w_i,   w_i = (dV r_i)_A
//
// Certificate: the linearization at V with the barrier multipliers as dual
// point (see duality_gap); at a centered V the gap is about mu * 2n.

#include "wcrc/error.hpp"
#include "wcrc/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace wcrc {

Eigen::VectorXd psd_pinv_solve(const Eigen::MatrixXd& S, const Eigen::VectorXd& rhs) {
  if (S.rows() == 0) return Eigen::VectorXd(0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(S);
  if (eig.info() != Eigen::Success) {
    throw Error(ErrorCode::kFactorizationFailure, "eigendecomposition failed");
  }
  const Eigen::VectorXd& lam = eig.eigenvalues();
  const double cutoff = kPinvCutoff * std::max(0.0, lam.cwiseAbs().maxCoeff());
  Eigen::VectorXd coef = eig.eigenvectors().transpose() * rhs;
  for (Eigen::Index k = 0; k < lam.size(); ++k) {
    coef(k) = (lam(k) > cutoff) ? coef(k) / lam(k) : 0.0;
  }
  return eig.eigenvectors() * coef;
}

Eigen::VectorXd schur_weights(const Eigen::MatrixXd& V, const IndexSet& sample,
                              const Eigen::VectorXd& b) {
  const Eigen::Index n = V.rows();
  Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
  if (sample.empty()) return a;
  const Eigen::MatrixXd S = V(sample, sample);
  const Eigen::VectorXd c = V(sample, Eigen::all) * b;
  a(sample) = psd_pinv_solve(S, c);
  return a;
}

SchurEvaluation schur_objective(const ScenarioDistribution& dist, const Eigen::MatrixXd& V) {
  const Index n = dist.population_size();
  if (V.rows() != n || V.cols() != n) {
    throw Error(ErrorCode::kDimensionMismatch, "V must be n x n");
  }
  SchurEvaluation out;
  out.gradient = Eigen::MatrixXd::Zero(n, n);
  out.terms.reserve(dist.size());
  for (const auto& s : dist.scenarios()) {
    const Eigen::VectorXd b = s.target_weights().dense();
    const Eigen::VectorXd r = b - schur_weights(V, s.sample(), b);
    // r^T V r is nonnegative for PSD V; drop rounding noise below zero.
    const double term = std::max(0.0, r.dot(V * r));
    out.terms.push_back(term);
    out.objective += s.probability() * term;
    out.gradient.noalias() += s.probability() * r * r.transpose();
  }
  return out;
}

namespace {

struct ScenarioData {
  IndexSet sample;
  Eigen::VectorXd b;
  double p;
};

/// Map between symmetric n x n matrices and upper-triangular coordinates.
class SymCoords {
 public:
  explicit SymCoords(Index n) : n_(n), id_(n, n) {
    Eigen::Index next = 0;
    for (Index j = 0; j < n; ++j) {
      for (Index k = j; k < n; ++k) {
        id_(j, k) = id_(k, j) = next++;
        pairs_.emplace_back(j, k);
      }
    }
  }

  Eigen::Index size() const { return static_cast<Eigen::Index>(pairs_.size()); }
  Eigen::Index id(Index j, Index k) const { return id_(j, k); }
  const std::pair<Index, Index>& pair(Eigen::Index v) const {
    return pairs_[static_cast<std::size_t>(v)];
  }

  /// Gradient in coordinates from a symmetric matrix gradient G.
  Eigen::VectorXd gradient(const Eigen::MatrixXd& G) const {
    Eigen::VectorXd g(size());
    for (Eigen::Index v = 0; v < size(); ++v) {
      const auto [j, k] = pair(v);
      g(v) = (j == k) ? G(j, j) : G(j, k) + G(k, j);
    }
    return g;
  }

  Eigen::MatrixXd matrix(const Eigen::VectorXd& x) const {
    Eigen::MatrixXd D(n_, n_);
    for (Eigen::Index v = 0; v < size(); ++v) {
      const auto [j, k] = pair(v);
      D(j, k) = D(k, j) = x(v);
    }
    return D;
  }

 private:
  Index n_;
  Eigen::Matrix<Eigen::Index, Eigen::Dynamic, Eigen::Dynamic> id_;
  std::vector<std::pair<Index, Index>> pairs_;
};

class BarrierProblem {
 public:
  BarrierProblem(const ScenarioDistribution& dist, double eps)
      : n_(dist.population_size()), eps_(eps), coords_(n_) {
    for (const auto& s : dist.scenarios()) {
      if (s.probability() == 0.0) continue;
      data_.push_back({s.sample(), s.target_weights().dense(), s.probability()});
    }
  }

  Index n() const { return n_; }
  const SymCoords& coords() const { return coords_; }

  /// Objective f and its gradient; false if V is outside the open domain.
  bool objective(const Eigen::MatrixXd& V, double& f, Eigen::MatrixXd* G,
                 Eigen::MatrixXd* R, std::vector<Eigen::MatrixXd>* Sinv) const {
    f = 0.0;
    if (G) G->setZero(n_, n_);
    if (R) R->resize(n_, static_cast<Eigen::Index>(data_.size()));
    if (Sinv) Sinv->resize(data_.size());
    for (std::size_t i = 0; i < data_.size(); ++i) {
      const auto& d = data_[i];
      Eigen::VectorXd r = d.b;
      if (!d.sample.empty()) {
        const Eigen::MatrixXd S = V(d.sample, d.sample);
        Eigen::LLT<Eigen::MatrixXd> llt(S);
        if (llt.info() != Eigen::Success) return false;
        const Eigen::VectorXd c = V(d.sample, Eigen::all) * d.b;
        r(d.sample) -= llt.solve(c);
        if (Sinv) {
          (*Sinv)[i] = llt.solve(Eigen::MatrixXd::Identity(S.rows(), S.cols()));
        }
      }
      f += d.p * r.dot(V * r);
      if (G) G->noalias() += d.p * r * r.transpose();
      if (R) R->col(static_cast<Eigen::Index>(i)) = r;
    }
    return true;
  }

  /// Barrier function value; false when V is infeasible.
  bool barrier(const Eigen::MatrixXd& V, double mu, double& phi, double& f) const {
    for (Index j = 0; j < n_; ++j) {
      if (!(V(j, j) < 1.0)) return false;
    }
    Eigen::MatrixXd X = V;
    X.diagonal().array() -= eps_;
    Eigen::LLT<Eigen::MatrixXd> llt(X);
    if (llt.info() != Eigen::Success) return false;
    double logdet = 0.0;
    const Eigen::MatrixXd& L = llt.matrixLLT();
    for (Index j = 0; j < n_; ++j) {
      if (!(L(j, j) > 0.0)) return false;
      logdet += 2.0 * std::log(L(j, j));
    }
    double caps = 0.0;
    for (Index j = 0; j < n_; ++j) caps += std::log(1.0 - V(j, j));
    if (!objective(V, f, nullptr, nullptr, nullptr)) return false;
    phi = f + mu * (logdet + caps);
    return std::isfinite(phi);
  }

  /// Gradient and (negated, positive definite) Hessian of the barrier
  /// function in triangular coordinates. Returns f.
  double derivatives(const Eigen::MatrixXd& V, double mu, Eigen::VectorXd& grad,
                     Eigen::MatrixXd& neg_hess, Eigen::MatrixXd& G) const {
    const Eigen::Index N = coords_.size();
    double f = 0.0;
    Eigen::MatrixXd R;
    std::vector<Eigen::MatrixXd> Sinv;
    if (!objective(V, f, &G, &R, &Sinv)) {
      throw Error(ErrorCode::kFactorizationFailure, "iterate left the barrier domain");
    }

    Eigen::MatrixXd X = V;
    X.diagonal().array() -= eps_;
    Eigen::LLT<Eigen::MatrixXd> llt(X);
    const Eigen::MatrixXd Y = llt.solve(Eigen::MatrixXd::Identity(n_, n_));

    Eigen::MatrixXd gm = G + mu * Y;
    grad = coords_.gradient(gm);
    for (Index j = 0; j < n_; ++j) grad(coords_.id(j, j)) -= mu / (1.0 - V(j, j));

    // -d^2 logdet[D, D] = tr(Y D Y D); coefficient of x_p x_q summed over
    // both orientations of each off-diagonal coordinate.
    neg_hess.setZero(N, N);
    for (Eigen::Index p = 0; p < N; ++p) {
      const auto [j, k] = coords_.pair(p);
      for (Eigen::Index q = p; q < N; ++q) {
        const auto [m, l] = coords_.pair(q);
        double h = Y(l, j) * Y(k, m);
        if (j != k) h += Y(l, k) * Y(j, m);
        if (m != l) h += Y(m, j) * Y(k, l);
        if (j != k && m != l) h += Y(m, k) * Y(j, l);
        neg_hess(p, q) = mu * h;
      }
    }
    for (Index j = 0; j < n_; ++j) {
      const double s = 1.0 - V(j, j);
      neg_hess(coords_.id(j, j), coords_.id(j, j)) += mu / (s * s);
    }
    neg_hess.triangularView<Eigen::StrictlyLower>() =
        neg_hess.transpose().triangularView<Eigen::StrictlyLower>();

    add_objective_curvature(R, Sinv, neg_hess);
    return f;
  }

 private:
  // Adds 2 sum_i p_i sum_{j,m in A_i} (S_i^{-1})_jm r_i r_i^T into the
  // (j, m) block of the full-index Hessian, grouped by (j, m) so that each
  // block is one matrix product.
  void add_objective_curvature(const Eigen::MatrixXd& R,
                               const std::vector<Eigen::MatrixXd>& Sinv,
                               Eigen::MatrixXd& neg_hess) const {
    const std::size_t nn = static_cast<std::size_t>(n_ * n_);
    std::vector<std::vector<std::pair<Eigen::Index, double>>> by_pair(nn);
    for (std::size_t i = 0; i < data_.size(); ++i) {
      const auto& A = data_[i].sample;
      const double two_p = 2.0 * data_[i].p;
      for (std::size_t u = 0; u < A.size(); ++u) {
        for (std::size_t v = u; v < A.size(); ++v) {
          const double t = Sinv[i](static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v));
          by_pair[static_cast<std::size_t>(A[u] * n_ + A[v])].emplace_back(
              static_cast<Eigen::Index>(i), two_p * t);
        }
      }
    }
    Eigen::MatrixXd Rs, Rw, B;
    for (Index j = 0; j < n_; ++j) {
      for (Index m = j; m < n_; ++m) {
        const auto& list = by_pair[static_cast<std::size_t>(j * n_ + m)];
        if (list.empty()) continue;
        const Eigen::Index cnt = static_cast<Eigen::Index>(list.size());
        Rs.resize(n_, cnt);
        Rw.resize(n_, cnt);
        for (Eigen::Index c = 0; c < cnt; ++c) {
          Rs.col(c) = R.col(list[static_cast<std::size_t>(c)].first);
          Rw.col(c) = list[static_cast<std::size_t>(c)].second * Rs.col(c);
        }
        B.noalias() = Rw * Rs.transpose();
        for (Index k = 0; k < n_; ++k) {
          const Eigen::Index row = coords_.id(j, k);
          for (Index l = 0; l < n_; ++l) {
            neg_hess(row, coords_.id(m, l)) += B(k, l);
            if (j != m) neg_hess(coords_.id(m, k), coords_.id(j, l)) += B(k, l);
          }
        }
      }
    }
  }

  Index n_;
  double eps_;
  SymCoords coords_;
  std::vector<ScenarioData> data_;
};

// Bound on f* - f(V) from concavity: f(V') <= f(V) + <G, V' - V>, and
// max <G, V'> over the feasible set is at most eps tr G + (1 - eps) sum y for
// any y >= 0 with Diag(y) >= G. Two candidate multipliers are tried, each
// shifted by the most negative eigenvalue of Diag(y) - G to make it feasible:
// the barrier's y_j = mu / (1 - V_jj), and the complementary-slackness
// estimate y_j = (G (V - eps I))_jj / (V_jj - eps), which stays accurate when
// the eigenvalue floor is nearly active.
double duality_gap(const Eigen::MatrixXd& G, const Eigen::MatrixXd& V, double eps, double mu) {
  const Index n = V.rows();
  const double base = eps * G.trace() - G.cwiseProduct(V).sum();
  auto gap_for = [&](const Eigen::VectorXd& y) {
    Eigen::MatrixXd Z = -G;
    Z.diagonal() += y;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Z, Eigen::EigenvaluesOnly);
    const double shift = std::max(0.0, -eig.eigenvalues().minCoeff());
    return base + (1.0 - eps) * (y.sum() + static_cast<double>(n) * shift);
  };
  const Eigen::VectorXd barrier = mu * (1.0 - V.diagonal().array()).inverse();
  Eigen::MatrixXd W = V;
  W.diagonal().array() -= eps;
  const Eigen::VectorXd slack =
      ((G * W).diagonal().array() / W.diagonal().array()).cwiseMax(0.0);
  return std::min(gap_for(barrier), gap_for(slack));
}

}  // namespace

SpectralSolution solve_schur(const ScenarioDistribution& dist, const SolverConfig& cfg) {
  cfg.validate();
  const double eps = cfg.eig_floor;
  BarrierProblem problem(dist, eps);
  const Index n = problem.n();
  const double nu = 2.0 * static_cast<double>(n);

  // Analytic center of the feasible set.
  Eigen::MatrixXd V = Eigen::MatrixXd::Identity(n, n) * (0.5 * (1.0 + eps));

  double mu = 1.0;
  int newton_steps = 0;
  double last_gap = std::numeric_limits<double>::infinity();
  Eigen::VectorXd grad;
  Eigen::MatrixXd neg_hess, G;

  while (newton_steps < cfg.max_iters) {
    // Centering.
    for (int inner = 0; inner < 200 && newton_steps < cfg.max_iters; ++inner) {
      problem.derivatives(V, mu, grad, neg_hess, G);
      ++newton_steps;
      Eigen::LLT<Eigen::MatrixXd> llt(neg_hess);
      double shift = 0.0;
      while (llt.info() != Eigen::Success) {
        shift = shift == 0.0 ? 1e-12 * neg_hess.diagonal().cwiseAbs().maxCoeff() : 10.0 * shift;
        Eigen::MatrixXd reg = neg_hess;
        reg.diagonal().array() += shift;
        llt.compute(reg);
      }
      const Eigen::VectorXd step = llt.solve(grad);
      const double decrement = grad.dot(step);
      if (!(decrement > 1e-13)) break;

      double phi0 = 0.0, f0 = 0.0;
      problem.barrier(V, mu, phi0, f0);
      const Eigen::MatrixXd D = problem.coords().matrix(step);
      double t = 1.0;
      bool moved = false;
      for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
        double phi = 0.0, f = 0.0;
        const Eigen::MatrixXd trial = V + t * D;
        if (problem.barrier(trial, mu, phi, f) && phi >= phi0 + 0.25 * t * decrement) {
          V = trial;
          moved = true;
          break;
        }
      }
      if (!moved || 0.5 * decrement < 1e-10 * std::max(1.0, mu)) break;
    }

    if (mu * nu <= 0.5 * cfg.rel_tol) {
      double f = 0.0;
      Eigen::MatrixXd G_at;
      problem.objective(V, f, &G_at, nullptr, nullptr);
      last_gap = std::max(0.0, duality_gap(G_at, V, eps, mu));
      if (last_gap <= cfg.rel_tol * std::max(1.0, std::abs(f))) {
        SpectralSolution out;
        out.V = V;
        out.objective = f;
        out.residual = last_gap;
        out.iterations = newton_steps;
        return out;
      }
    }
    mu *= 0.1;
    if (mu < 1e-16) break;
  }
  throw SolverError("Schur objective solver did not reach the requested gap", last_gap);
}

}  // namespace wcrc
