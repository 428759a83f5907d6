#pragma once

// JSON / CSV interchange. Indices in every file are 0-based.
//
// Distribution:  {"n": int, "scenarios": [{"sample": [..], "target": [..],
//                 "prob": float (optional)}], "provenance": any (optional)}
//   Scenarios without "prob" share the mass left over by those with one.
// Estimator:     {"n": int, "weights": [{"scenario": int,
//                 "entries": [[index, weight], ...]}], "V": [[...]] (optional)}
// Query:         {"sample": [..], "target": [..], "x_A": [[index, value], ...]}
//   x_A may be omitted where only (A, B) matters.
// Values:        JSON array of n floats, or one value per CSV row.

#include "wcrc/audit.hpp"
#include "wcrc/estimators.hpp"
#include "wcrc/scenario.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace wcrc {

using Json = nlohmann::json;

ScenarioDistribution distribution_from_json(const Json& j);
Json distribution_to_json(const ScenarioDistribution& dist);
ScenarioDistribution load_distribution(const std::filesystem::path& path);
void save_distribution(const ScenarioDistribution& dist, const std::filesystem::path& path);

SemilinearEstimator estimator_from_json(const Json& j);
Json estimator_to_json(const SemilinearEstimator& est);
SemilinearEstimator load_estimator(const std::filesystem::path& path);
void save_estimator(const SemilinearEstimator& est, const std::filesystem::path& path);

struct QueryInstance {
  IndexSet sample;
  IndexSet target;
  Observations observed;
};

QueryInstance query_from_json(const Json& j);
QueryInstance load_query(const std::filesystem::path& path);

DataValues load_values(const std::filesystem::path& path);

Json audit_report_to_json(const AuditReport& report);

/// CSV with n rows of numeric cells; an optional non-numeric header row is
/// skipped and empty cells read as NaN.
Eigen::MatrixXd load_csv_matrix(const std::filesystem::path& path);

Json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const Json& j);

Json read_json(const std::filesystem::path& path);
void write_json(const Json& j, const std::filesystem::path& path);

}  // namespace wcrc
