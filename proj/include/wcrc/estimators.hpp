#pragma once

// Semilinear estimators: one weight vector per scenario, supported on that
// scenario's sample set, plus the classical baselines used for comparison.

#include "wcrc/scenario.hpp"

#include <optional>
#include <span>
#include <variant>
#include <vector>

namespace wcrc {

struct Observation {
  Index index;
  double value;
};
using Observations = std::vector<Observation>;

class SemilinearEstimator {
 public:
  SemilinearEstimator(Index n, std::vector<SparseVector> weights,
                      std::optional<Eigen::MatrixXd> certificate = std::nullopt);

  Index population_size() const noexcept { return n_; }
  std::size_t size() const noexcept { return weights_.size(); }
  const std::vector<SparseVector>& weights() const noexcept { return weights_; }
  const SparseVector& weights(std::size_t scenario) const { return weights_.at(scenario); }
  const std::optional<Eigen::MatrixXd>& certificate() const noexcept { return certificate_; }

  /// Throws unless there is one weight vector per scenario and each is
  /// supported on the scenario's sample set.
  void check_against(const ScenarioDistribution& dist) const;

 private:
  Index n_;
  std::vector<SparseVector> weights_;
  std::optional<Eigen::MatrixXd> certificate_;
};

/// a_i^T x over the observed sample values.
double estimate(const SemilinearEstimator& est, std::size_t scenario,
                const Observations& observed);

/// Same, for a bare weight vector.
double apply_weights(const SparseVector& weights, const Observations& observed);

struct SampleMean {};
/// Weights 1/(n p_j); not self-normalized.
struct HorvitzThompson {
  Eigen::VectorXd inclusion_probs;
};
/// Average of per-group sample means; a group with no sampled member
/// contributes a zero mean but keeps its 1/#groups share.
struct Subgroup {
  std::vector<IndexSet> groups;
};
/// Mean of the w' = min(|B|, |A|) highest-indexed sample values.
struct RecentWindow {};

using BaselineKind = std::variant<SampleMean, HorvitzThompson, Subgroup, RecentWindow>;

/// Validates the kind against a population of size n.
void validate_baseline(const BaselineKind& kind, Index n);

SparseVector baseline_weights(const BaselineKind& kind, const Scenario& scenario);

/// Baseline applied to every scenario of `dist`.
SemilinearEstimator baseline_estimator(const BaselineKind& kind, const ScenarioDistribution& dist);

const char* baseline_name(const BaselineKind& kind);

/// sum_i p_i ((a_i - b_i)^T x)^2 for fixed values x.
double mse_on_values(std::span<const SparseVector> weights, const ScenarioDistribution& dist,
                     const DataValues& x);

inline double mse_on_values(const SemilinearEstimator& est, const ScenarioDistribution& dist,
                            const DataValues& x) {
  return mse_on_values(est.weights(), dist, x);
}

}  // namespace wcrc
