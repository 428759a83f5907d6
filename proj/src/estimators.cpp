#include "wcrc/estimators.hpp"

#include "wcrc/error.hpp"

#include <algorithm>
#include <cmath>

namespace wcrc {

SemilinearEstimator::SemilinearEstimator(Index n, std::vector<SparseVector> weights,
                                         std::optional<Eigen::MatrixXd> certificate)
    : n_(n), weights_(std::move(weights)), certificate_(std::move(certificate)) {
  for (const auto& w : weights_) {
    if (w.dim() != n_) {
      throw Error(ErrorCode::kDimensionMismatch, "weight vector dimension differs from n");
    }
  }
  if (certificate_) {
    const auto& V = *certificate_;
    if (V.rows() != n_ || V.cols() != n_) {
      throw Error(ErrorCode::kDimensionMismatch, "certificate matrix must be n x n");
    }
    if ((V - V.transpose()).cwiseAbs().maxCoeff() > 1e-9) {
      throw Error(ErrorCode::kInvariantViolation, "certificate matrix is not symmetric");
    }
    if (V.diagonal().maxCoeff() > 1.0 + 1e-9) {
      throw Error(ErrorCode::kInvariantViolation, "certificate diagonal exceeds 1");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(V, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -1e-8) {
      throw Error(ErrorCode::kInvariantViolation, "certificate matrix is not PSD");
    }
  }
}

void SemilinearEstimator::check_against(const ScenarioDistribution& dist) const {
  if (dist.population_size() != n_) {
    throw Error(ErrorCode::kDimensionMismatch, "estimator and distribution populations differ");
  }
  if (dist.size() != weights_.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "estimator has " + std::to_string(weights_.size()) + " weight vectors for " +
                    std::to_string(dist.size()) + " scenarios");
  }
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    for (const auto& e : weights_[i].entries()) {
      if (e.weight != 0.0 && !dist[i].samples(e.index)) {
        throw Error(ErrorCode::kInvariantViolation,
                    "scenario " + std::to_string(i) + " puts weight on unsampled index " +
                        std::to_string(e.index));
      }
    }
  }
}

double apply_weights(const SparseVector& weights, const Observations& observed) {
  double acc = 0.0;
  for (const auto& e : weights.entries()) {
    if (e.weight == 0.0) continue;
    auto it = std::find_if(observed.begin(), observed.end(),
                           [&](const Observation& o) { return o.index == e.index; });
    if (it == observed.end()) {
      throw Error(ErrorCode::kMissingObservation,
                  "no observed value for index " + std::to_string(e.index));
    }
    acc += e.weight * it->value;
  }
  return acc;
}

double estimate(const SemilinearEstimator& est, std::size_t scenario,
                const Observations& observed) {
  if (scenario >= est.size()) {
    throw Error(ErrorCode::kIndexOutOfRange,
                "scenario " + std::to_string(scenario) + " not in estimator");
  }
  return apply_weights(est.weights(scenario), observed);
}

namespace {

struct Validator {
  Index n;

  void operator()(const SampleMean&) const {}
  void operator()(const RecentWindow&) const {}
  void operator()(const HorvitzThompson& ht) const {
    if (ht.inclusion_probs.size() != n) {
      throw Error(ErrorCode::kDimensionMismatch, "inclusion probabilities must have length n");
    }
    for (Index j = 0; j < n; ++j) {
      if (!(ht.inclusion_probs(j) > 0.0) || ht.inclusion_probs(j) > 1.0) {
        throw Error(ErrorCode::kInvalidArgument, "inclusion probabilities must lie in (0, 1]");
      }
    }
  }
  void operator()(const Subgroup& sg) const {
    std::vector<int> seen(static_cast<std::size_t>(n), 0);
    for (const auto& g : sg.groups) {
      if (g.empty()) throw Error(ErrorCode::kInvalidArgument, "empty subgroup");
      for (Index j : g) {
        if (j < 0 || j >= n) throw Error(ErrorCode::kIndexOutOfRange, "subgroup index");
        if (seen[static_cast<std::size_t>(j)]++) {
          throw Error(ErrorCode::kInvalidArgument, "subgroups overlap");
        }
      }
    }
    if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
      throw Error(ErrorCode::kInvalidArgument, "subgroups do not cover the population");
    }
  }
};

struct WeightMaker {
  const Scenario& s;

  SparseVector operator()(const SampleMean&) const {
    const double w = 1.0 / static_cast<double>(s.sample().size());
    std::vector<WeightEntry> out;
    for (Index j : s.sample()) out.push_back({j, w});
    return SparseVector(s.population_size(), std::move(out));
  }

  SparseVector operator()(const HorvitzThompson& ht) const {
    const double n = static_cast<double>(s.population_size());
    std::vector<WeightEntry> out;
    for (Index j : s.sample()) out.push_back({j, 1.0 / (n * ht.inclusion_probs(j))});
    return SparseVector(s.population_size(), std::move(out));
  }

  SparseVector operator()(const Subgroup& sg) const {
    const double groups = static_cast<double>(sg.groups.size());
    std::vector<WeightEntry> out;
    for (const auto& g : sg.groups) {
      IndexSet hit;
      for (Index j : g) {
        if (s.samples(j)) hit.push_back(j);
      }
      if (hit.empty()) continue;
      const double w = 1.0 / (groups * static_cast<double>(hit.size()));
      for (Index j : hit) out.push_back({j, w});
    }
    return SparseVector(s.population_size(), std::move(out));
  }

  SparseVector operator()(const RecentWindow&) const {
    const auto& a = s.sample();
    const std::size_t window = std::min(s.target().size(), a.size());
    const double w = 1.0 / static_cast<double>(window);
    std::vector<WeightEntry> out;
    for (std::size_t k = a.size() - window; k < a.size(); ++k) out.push_back({a[k], w});
    return SparseVector(s.population_size(), std::move(out));
  }
};

}  // namespace

void validate_baseline(const BaselineKind& kind, Index n) { std::visit(Validator{n}, kind); }

SparseVector baseline_weights(const BaselineKind& kind, const Scenario& scenario) {
  if (scenario.sample().empty()) {
    throw Error(ErrorCode::kInvalidArgument, "baseline estimators need a non-empty sample");
  }
  validate_baseline(kind, scenario.population_size());
  return std::visit(WeightMaker{scenario}, kind);
}

SemilinearEstimator baseline_estimator(const BaselineKind& kind,
                                       const ScenarioDistribution& dist) {
  validate_baseline(kind, dist.population_size());
  std::vector<SparseVector> weights;
  weights.reserve(dist.size());
  for (const auto& s : dist.scenarios()) {
    if (s.sample().empty()) {
      throw Error(ErrorCode::kInvalidArgument, "baseline estimators need a non-empty sample");
    }
    weights.push_back(std::visit(WeightMaker{s}, kind));
  }
  return SemilinearEstimator(dist.population_size(), std::move(weights));
}

const char* baseline_name(const BaselineKind& kind) {
  struct Namer {
    const char* operator()(const SampleMean&) const { return "SampleMean"; }
    const char* operator()(const HorvitzThompson&) const { return "HorvitzThompson"; }
    const char* operator()(const Subgroup&) const { return "Subgroup"; }
    const char* operator()(const RecentWindow&) const { return "RecentWindow"; }
  };
  return std::visit(Namer{}, kind);
}

double mse_on_values(std::span<const SparseVector> weights, const ScenarioDistribution& dist,
                     const DataValues& x) {
  if (weights.size() != dist.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "one weight vector per scenario required");
  }
  if (x.size() != dist.population_size()) {
    throw Error(ErrorCode::kDimensionMismatch, "values must have length n");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    const double err = weights[i].dot(x) - dist[i].target_weights().dot(x);
    total += dist[i].probability() * err * err;
  }
  return total;
}

}  // namespace wcrc
