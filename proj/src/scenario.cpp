#include "wcrc/scenario.hpp"

#include "wcrc/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace wcrc {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid argument";
    case ErrorCode::kDegenerateTarget: return "degenerate target";
    case ErrorCode::kIndexOutOfRange: return "index out of range";
    case ErrorCode::kDuplicateIndex: return "duplicate index";
    case ErrorCode::kDimensionMismatch: return "dimension mismatch";
    case ErrorCode::kMalformedSchema: return "malformed schema";
    case ErrorCode::kProbabilitySum: return "probability sum";
    case ErrorCode::kEmptyDistribution: return "empty distribution";
    case ErrorCode::kIoFailure: return "io failure";
    case ErrorCode::kThresholdExceeded: return "threshold exceeded";
    case ErrorCode::kSolverNonConvergence: return "solver non-convergence";
    case ErrorCode::kFactorizationFailure: return "factorization failure";
    case ErrorCode::kIllConditioned: return "ill-conditioned";
    case ErrorCode::kMissingObservation: return "missing observation";
    case ErrorCode::kInvariantViolation: return "invariant violation";
  }
  return "unknown";
}

SparseVector::SparseVector(Index dim, std::vector<WeightEntry> entries)
    : dim_(dim), entries_(std::move(entries)) {
  if (dim_ < 0) throw Error(ErrorCode::kInvalidArgument, "negative dimension");
  std::sort(entries_.begin(), entries_.end(),
            [](const WeightEntry& a, const WeightEntry& b) { return a.index < b.index; });
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].index < 0 || entries_[i].index >= dim_) {
      throw Error(ErrorCode::kIndexOutOfRange,
                  "weight index " + std::to_string(entries_[i].index) +
                      " outside [0, " + std::to_string(dim_) + ")");
    }
    if (i > 0 && entries_[i].index == entries_[i - 1].index) {
      throw Error(ErrorCode::kDuplicateIndex,
                  "weight index " + std::to_string(entries_[i].index) + " repeated");
    }
  }
}

double SparseVector::dot(const Eigen::VectorXd& x) const {
  if (x.size() != dim_) {
    throw Error(ErrorCode::kDimensionMismatch,
                "vector of length " + std::to_string(x.size()) + " against dimension " +
                    std::to_string(dim_));
  }
  double acc = 0.0;
  for (const auto& e : entries_) acc += e.weight * x(e.index);
  return acc;
}

double SparseVector::sum() const {
  double acc = 0.0;
  for (const auto& e : entries_) acc += e.weight;
  return acc;
}

Eigen::VectorXd SparseVector::dense() const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(dim_);
  for (const auto& e : entries_) out(e.index) = e.weight;
  return out;
}

IndexSet SparseVector::support() const {
  IndexSet out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) {
    if (e.weight != 0.0) out.push_back(e.index);
  }
  return out;
}

double SparseVector::at(Index index) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), index,
                             [](const WeightEntry& e, Index i) { return e.index < i; });
  return (it != entries_.end() && it->index == index) ? it->weight : 0.0;
}

IndexSet normalize_index_set(IndexSet indices, Index n) {
  std::sort(indices.begin(), indices.end());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] < 0 || indices[i] >= n) {
      throw Error(ErrorCode::kIndexOutOfRange,
                  "index " + std::to_string(indices[i]) + " outside [0, " +
                      std::to_string(n) + ")");
    }
    if (i > 0 && indices[i] == indices[i - 1]) {
      throw Error(ErrorCode::kDuplicateIndex,
                  "index " + std::to_string(indices[i]) + " repeated");
    }
  }
  return indices;
}

SparseVector make_target_vector(std::span<const Index> target, Index n) {
  if (target.empty()) throw Error(ErrorCode::kDegenerateTarget, "empty target set");
  IndexSet sorted = normalize_index_set(IndexSet(target.begin(), target.end()), n);
  const double w = 1.0 / static_cast<double>(sorted.size());
  std::vector<WeightEntry> entries;
  entries.reserve(sorted.size());
  for (Index j : sorted) entries.push_back({j, w});
  return SparseVector(n, std::move(entries));
}

double target_mean(const SparseVector& b, const DataValues& x) { return b.dot(x); }

Scenario::Scenario(IndexSet sample, IndexSet target, double probability, Index n)
    : sample_(normalize_index_set(std::move(sample), n)),
      target_(normalize_index_set(std::move(target), n)),
      weights_(make_target_vector(target_, n)),
      probability_(probability) {
  if (!(probability_ >= 0.0) || !std::isfinite(probability_)) {
    throw Error(ErrorCode::kInvalidArgument, "scenario probability must be finite and >= 0");
  }
}

bool Scenario::samples(Index j) const {
  return std::binary_search(sample_.begin(), sample_.end(), j);
}

Scenario Scenario::with_probability(double probability) const {
  return Scenario(sample_, target_, probability, population_size());
}

ScenarioDistribution::ScenarioDistribution(Index n, std::vector<Scenario> scenarios,
                                           std::optional<std::string> provenance)
    : n_(n), scenarios_(std::move(scenarios)), provenance_(std::move(provenance)) {
  if (n_ <= 0) throw Error(ErrorCode::kInvalidArgument, "population size must be positive");
  if (scenarios_.empty()) throw Error(ErrorCode::kEmptyDistribution, "no scenarios");
  double total = 0.0;
  for (const auto& s : scenarios_) {
    if (s.population_size() != n_) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "scenario built for population " + std::to_string(s.population_size()) +
                      ", distribution has " + std::to_string(n_));
    }
    total += s.probability();
  }
  if (std::abs(total - 1.0) > kProbabilitySumTolerance) {
    throw Error(ErrorCode::kProbabilitySum,
                "scenario probabilities sum to " + std::to_string(total));
  }
}

ScenarioDistribution ScenarioDistribution::uniform(
    Index n, const std::vector<std::pair<IndexSet, IndexSet>>& pairs,
    std::optional<std::string> provenance) {
  if (pairs.empty()) throw Error(ErrorCode::kEmptyDistribution, "no scenarios");
  const double p = 1.0 / static_cast<double>(pairs.size());
  std::vector<Scenario> scenarios;
  scenarios.reserve(pairs.size());
  for (const auto& [sample, target] : pairs) scenarios.emplace_back(sample, target, p, n);
  return ScenarioDistribution(n, std::move(scenarios), std::move(provenance));
}

ScenarioDistribution ScenarioDistribution::merged() const {
  std::map<std::pair<IndexSet, IndexSet>, double> mass;
  std::vector<std::pair<IndexSet, IndexSet>> order;
  for (const auto& s : scenarios_) {
    auto key = std::make_pair(s.sample(), s.target());
    auto [it, inserted] = mass.emplace(key, 0.0);
    if (inserted) order.push_back(key);
    it->second += s.probability();
  }
  std::vector<Scenario> out;
  out.reserve(order.size());
  for (const auto& key : order) out.emplace_back(key.first, key.second, mass[key], n_);
  return ScenarioDistribution(n_, std::move(out), provenance_);
}

void require_bounded(const DataValues& x) {
  for (Index j = 0; j < x.size(); ++j) {
    if (!(std::abs(x(j)) <= 1.0 + 1e-12)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "value x[" + std::to_string(j) + "] = " + std::to_string(x(j)) +
                      " outside [-1, 1]");
    }
  }
}

}  // namespace wcrc
