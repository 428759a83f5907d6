#pragma once

// End-to-end drivers for the importance-sampling table, the snowball sweep and
// the selective-prediction sweep.

#include "wcrc/audit.hpp"
#include "wcrc/io.hpp"
#include "wcrc/optimal.hpp"
#include "wcrc/samplers.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace wcrc {

struct ExperimentSpec {
  /// "table1", "snowball" or "selective".
  std::string experiment = "table1";
  std::uint64_t seed = 0;
  /// Monte-Carlo scenarios per run (table1, snowball).
  int num_scenarios = 2000;
  /// Sample sizes (snowball) or population sizes (selective). Sorted.
  std::vector<Index> sweep;
  /// Population size for table1 and snowball.
  Index population = 50;
  int neighbor_count = 5;
  int recruits_per_node = 2;
  bool enumerate = true;
  SolverConfig solver = design_config();
  /// Settings for the worst-case audits; the floor is ignored there.
  AuditConfig audit;

  void validate() const;
};

/// Defaults for each experiment id.
ExperimentSpec default_spec(const std::string& experiment);
ExperimentSpec spec_from_json(const Json& j);
Json spec_to_json(const ExperimentSpec& spec);

struct ResultRow {
  std::string experiment;
  std::string estimator;
  std::string values;
  double metric = 0.0;
  Index sweep = 0;
  std::uint64_t seed = 0;
};

struct Artifact {
  std::string name;
  SemilinearEstimator estimator;
};

struct ExperimentResult {
  std::vector<ResultRow> rows;
  std::vector<Artifact> artifacts;
};

ExperimentResult run_table1(const ExperimentSpec& spec);
ExperimentResult run_snowball(const ExperimentSpec& spec);
ExperimentResult run_selective(const ExperimentSpec& spec);
ExperimentResult run_experiment(const ExperimentSpec& spec);

/// Rows sorted by (experiment, sweep, estimator, values).
void sort_rows(std::vector<ResultRow>& rows);

/// Looks up a row's metric; throws when absent.
double metric_of(const std::vector<ResultRow>& rows, const std::string& estimator,
                 const std::string& values, Index sweep);

std::string rows_to_csv(const std::vector<ResultRow>& rows);
std::vector<ResultRow> rows_from_csv(const std::string& text);
Json rows_to_json(const std::vector<ResultRow>& rows);

/// Writes results.csv, results.json and one <artifact>.estimator.json each.
void write_results(const ExperimentResult& result, const std::filesystem::path& dir);

/// Importance-sampling probabilities of the table: 0.1 for the first half,
/// 0.5 for the second.
Eigen::VectorXd table1_inclusion_probs(Index n);

/// Data sets of the table: constant, intergroup (+1 / -1 halves) and
/// intragroup (alternating signs).
std::vector<std::pair<std::string, DataValues>> table1_values(Index n);

}  // namespace wcrc
