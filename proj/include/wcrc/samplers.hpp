#pragma once

// Scenario generators for importance, snowball and selective-prediction
// sampling, and the geometric population behind snowball sampling.

#include "wcrc/scenario.hpp"

#include <cstdint>
#include <filesystem>
#include <utility>

namespace wcrc {

struct ImportanceConfig {
  Eigen::VectorXd inclusion_probs;
  int num_scenarios = 1000;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

struct SnowballConfig {
  Index num_points = 50;
  int neighbor_count = 5;
  int recruits_per_node = 2;
  Index sample_size = 15;
  int num_scenarios = 1000;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

struct SelectiveConfig {
  Index n = 16;
  std::uint64_t rng_seed = 0;
  /// Exact enumeration of all (t, w) pairs; otherwise num_scenarios draws.
  bool enumerate = true;
  int num_scenarios = 1000;

  void validate() const;
};

struct GeometricPopulation {
  /// n x 2 coordinates in the unit square.
  Eigen::MatrixX2d points;
  /// k nearest neighbors of each point, nearest first, self excluded.
  std::vector<IndexSet> neighbors;

  Index size() const noexcept { return points.rows(); }
};

/// n uniform points in the unit square with k-nearest-neighbor lists.
GeometricPopulation make_geometric_population(Index n, int k, std::uint64_t seed);

/// Independent Bernoulli(p_j) sampling; empty samples are redrawn.
ScenarioDistribution gen_importance(const ImportanceConfig& cfg);

std::pair<GeometricPopulation, ScenarioDistribution> gen_snowball(const SnowballConfig& cfg);

ScenarioDistribution gen_selective(const SelectiveConfig& cfg);

/// x_j = x + y - 1, so values lie in [-1, 1].
DataValues spatial_values(const GeometricPopulation& pop);

void save_points_csv(const GeometricPopulation& pop, const std::filesystem::path& path);

}  // namespace wcrc
