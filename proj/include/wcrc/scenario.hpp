#pragma once

// Populations, sample/target scenarios and their joint distribution.
//
// All indices are 0-based. A scenario pairs the observed sample set A with a
// target set B; the quantity to estimate is mean(x_B) = b^T x where b is
// uniform over B.

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace wcrc {

using Index = Eigen::Index;
using IndexSet = std::vector<Index>;
using DataValues = Eigen::VectorXd;

struct WeightEntry {
  Index index;
  double weight;

  friend bool operator==(const WeightEntry&, const WeightEntry&) = default;
};

/// Sparse vector of fixed dimension with entries sorted by index.
class SparseVector {
 public:
  SparseVector() = default;
  /// Entries are sorted; duplicate indices or indices outside [0, dim) throw.
  SparseVector(Index dim, std::vector<WeightEntry> entries);

  Index dim() const noexcept { return dim_; }
  const std::vector<WeightEntry>& entries() const noexcept { return entries_; }
  bool empty() const noexcept { return entries_.empty(); }

  double dot(const Eigen::VectorXd& x) const;
  double sum() const;
  Eigen::VectorXd dense() const;
  IndexSet support() const;
  /// Weight at `index`, zero when absent.
  double at(Index index) const;

  friend bool operator==(const SparseVector&, const SparseVector&) = default;

 private:
  Index dim_ = 0;
  std::vector<WeightEntry> entries_;
};

/// b with b_j = 1/|target| on the target set and 0 elsewhere.
SparseVector make_target_vector(std::span<const Index> target, Index n);

/// b^T x.
double target_mean(const SparseVector& b, const DataValues& x);

/// Sorts, rejects duplicates and indices outside [0, n).
IndexSet normalize_index_set(IndexSet indices, Index n);

class Scenario {
 public:
  /// `sample` may be empty; `target` may not.
  Scenario(IndexSet sample, IndexSet target, double probability, Index n);

  const IndexSet& sample() const noexcept { return sample_; }
  const IndexSet& target() const noexcept { return target_; }
  const SparseVector& target_weights() const noexcept { return weights_; }
  double probability() const noexcept { return probability_; }
  Index population_size() const noexcept { return weights_.dim(); }

  bool samples(Index j) const;
  Scenario with_probability(double probability) const;

 private:
  IndexSet sample_;
  IndexSet target_;
  SparseVector weights_;
  double probability_;
};

inline constexpr double kProbabilitySumTolerance = 1e-9;

/// Finite weighted list of scenarios over a population of size n.
/// Duplicate (A, B) pairs are kept as separate atoms.
class ScenarioDistribution {
 public:
  ScenarioDistribution(Index n, std::vector<Scenario> scenarios,
                       std::optional<std::string> provenance = std::nullopt);

  /// Equal probability 1/m for each (sample, target) pair.
  static ScenarioDistribution uniform(
      Index n, const std::vector<std::pair<IndexSet, IndexSet>>& pairs,
      std::optional<std::string> provenance = std::nullopt);

  Index population_size() const noexcept { return n_; }
  std::size_t size() const noexcept { return scenarios_.size(); }
  const Scenario& operator[](std::size_t i) const { return scenarios_[i]; }
  const std::vector<Scenario>& scenarios() const noexcept { return scenarios_; }
  const std::optional<std::string>& provenance() const noexcept { return provenance_; }

  /// Merges duplicate (A, B) atoms, summing their probabilities.
  ScenarioDistribution merged() const;

 private:
  Index n_;
  std::vector<Scenario> scenarios_;
  std::optional<std::string> provenance_;
};

/// Throws unless every |x_j| <= 1 + 1e-12.
void require_bounded(const DataValues& x);

}  // namespace wcrc
