#pragma once

// Independent reference computations and random instance generators shared
// by the unit and acceptance tests. Nothing here calls into the solvers.

#include "wcrc/estimators.hpp"
#include "wcrc/scenario.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

namespace oracle {

using wcrc::Index;
using wcrc::IndexSet;
using Eigen::MatrixXd;
using Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;

/// max over all 2^n sign vectors of x^T M x, without symmetry tricks.
inline double brute_force_max(const MatrixXd& M) {
  const Index n = M.rows();
  double best = -std::numeric_limits<double>::infinity();
  VectorXd x(n);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    for (Index j = 0; j < n; ++j) x(j) = (mask >> j) & 1 ? 1.0 : -1.0;
    double v = 0.0;
    for (Index j = 0; j < n; ++j)
      for (Index k = 0; k < n; ++k) v += x(j) * M(j, k) * x(k);
    best = std::max(best, v);
  }
  return best;
}

/// sum_i p_i (sum_j a_ij x_j - mean(x_B))^2 by explicit loops.
inline double loop_mse(const std::vector<VectorXd>& weights, const wcrc::ScenarioDistribution& dist,
                       const VectorXd& x) {
  double total = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    double est = 0.0;
    for (Index j = 0; j < x.size(); ++j) est += weights[i](j) * x(j);
    double truth = 0.0;
    for (Index j : dist[i].target()) truth += x(j);
    truth /= static_cast<double>(dist[i].target().size());
    total += dist[i].probability() * (est - truth) * (est - truth);
  }
  return total;
}

/// b^T V b minus the best linear prediction of it from the sample block:
/// min over a supported on A of (a - b)^T V (a - b), solved densely.
inline double schur_term(const MatrixXd& V, const IndexSet& sample, const IndexSet& target) {
  const Index n = V.rows();
  VectorXd b = VectorXd::Zero(n);
  for (Index j : target) b(j) = 1.0 / static_cast<double>(target.size());
  const double bvb = b.dot(V * b);
  if (sample.empty()) return bvb;
  const Index k = static_cast<Index>(sample.size());
  MatrixXd VAA(k, k);
  VectorXd rhs(k);
  for (Index r = 0; r < k; ++r) {
    rhs(r) = (V.row(sample[r]) * b)(0);
    for (Index c = 0; c < k; ++c) VAA(r, c) = V(sample[r], sample[c]);
  }
  const VectorXd a = VAA.completeOrthogonalDecomposition().solve(rhs);
  return bvb - rhs.dot(a);
}

/// Objective sum_i p_i schur_term_i.
inline double schur_objective(const wcrc::ScenarioDistribution& dist, const MatrixXd& V) {
  double total = 0.0;
  for (const auto& s : dist.scenarios()) total += s.probability() * schur_term(V, s.sample(), s.target());
  return total;
}

/// Feasible V = eps I + (1 - eps) W^T W with column norms at most `cap`.
inline MatrixXd random_feasible_V(Index n, std::mt19937_64& rng, double eps = 0.0, double cap = 1.0,
                                  Index rank = -1) {
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.2, 1.0);
  if (rank <= 0) rank = n;
  MatrixXd W(rank, n);
  for (Index r = 0; r < rank; ++r)
    for (Index c = 0; c < n; ++c) W(r, c) = g(rng);
  for (Index c = 0; c < n; ++c) W.col(c) *= cap * u(rng) / W.col(c).norm();
  return eps * MatrixXd::Identity(n, n) + (1.0 - eps) * W.transpose() * W;
}

inline IndexSet random_subset(Index n, double p, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(p);
  IndexSet out;
  for (Index j = 0; j < n; ++j)
    if (coin(rng)) out.push_back(j);
  return out;
}

/// m scenarios with Bernoulli(0.5) samples, non-empty random targets and
/// random probabilities.
inline wcrc::ScenarioDistribution random_distribution(Index n, int m, std::mt19937_64& rng,
                                                      double sample_p = 0.5) {
  std::uniform_real_distribution<double> u(0.1, 1.0);
  std::uniform_int_distribution<Index> pick(0, n - 1);
  std::vector<double> w(m);
  double total = 0.0;
  for (auto& v : w) total += (v = u(rng));
  std::vector<wcrc::Scenario> out;
  for (int i = 0; i < m; ++i) {
    IndexSet target = random_subset(n, 0.3, rng);
    if (target.empty()) target.push_back(pick(rng));
    out.emplace_back(random_subset(n, sample_p, rng), std::move(target), w[i] / total, n);
  }
  return wcrc::ScenarioDistribution(n, std::move(out));
}

/// Dense random weights supported on each sample set, in [-1, 1].
inline std::vector<VectorXd> random_dense_weights(const wcrc::ScenarioDistribution& dist,
                                                  std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<VectorXd> out;
  for (const auto& s : dist.scenarios()) {
    VectorXd a = VectorXd::Zero(dist.population_size());
    for (Index j : s.sample()) a(j) = u(rng);
    out.push_back(a);
  }
  return out;
}

inline std::vector<wcrc::SparseVector> to_sparse(const std::vector<VectorXd>& dense) {
  std::vector<wcrc::SparseVector> out;
  for (const auto& a : dense) {
    std::vector<wcrc::WeightEntry> e;
    for (Index j = 0; j < a.size(); ++j)
      if (a(j) != 0.0) e.push_back({j, a(j)});
    out.emplace_back(a.size(), std::move(e));
  }
  return out;
}

inline VectorXd random_box(Index n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  VectorXd x(n);
  for (Index j = 0; j < n; ++j) x(j) = u(rng);
  return x;
}

inline double min_eig(const MatrixXd& A) {
  return Eigen::SelfAdjointEigenSolver<MatrixXd>(A, Eigen::EigenvaluesOnly).eigenvalues()(0);
}

/// The four-element distribution with weights 0.3, 0.3, 0.3, 0.05, 0.05 used
/// as the non-uniform worked instance.
inline wcrc::ScenarioDistribution weighted_four() {
  using wcrc::Scenario;
  std::vector<Scenario> s;
  s.emplace_back(IndexSet{0, 2}, IndexSet{1, 3}, 0.3, 4);
  s.emplace_back(IndexSet{1, 3}, IndexSet{0, 2}, 0.3, 4);
  s.emplace_back(IndexSet{2, 3}, IndexSet{0, 1}, 0.3, 4);
  s.emplace_back(IndexSet{0, 2, 3}, IndexSet{1}, 0.05, 4);
  s.emplace_back(IndexSet{1, 2, 3}, IndexSet{0}, 0.05, 4);
  return wcrc::ScenarioDistribution(4, std::move(s));
}

}  // namespace oracle
