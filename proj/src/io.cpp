#include "wcrc/io.hpp"

#include "wcrc/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <fstream>
#include <sstream>

namespace wcrc {

namespace {

[[noreturn]] void malformed(const std::string& what) {
  throw Error(ErrorCode::kMalformedSchema, what);
}

IndexSet index_list(const Json& j, const char* field) {
  if (!j.contains(field) || !j.at(field).is_array()) {
    malformed(std::string("field '") + field + "' must be an array of integers");
  }
  IndexSet out;
  for (const auto& v : j.at(field)) {
    if (!v.is_number_integer()) {
      malformed(std::string("field '") + field + "' must contain integers");
    }
    out.push_back(v.get<Index>());
  }
  return out;
}

Index population(const Json& j) {
  if (!j.is_object() || !j.contains("n") || !j.at("n").is_number_integer()) {
    malformed("field 'n' must be an integer");
  }
  const Index n = j.at("n").get<Index>();
  if (n <= 0) malformed("field 'n' must be positive");
  return n;
}

}  // namespace

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    malformed(path.string() + ": " + e.what());
  }
}

void write_json(const Json& j, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoFailure, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

ScenarioDistribution distribution_from_json(const Json& j) {
  const Index n = population(j);
  if (!j.contains("scenarios") || !j.at("scenarios").is_array()) {
    malformed("field 'scenarios' must be an array");
  }
  const auto& list = j.at("scenarios");
  if (list.empty()) throw Error(ErrorCode::kEmptyDistribution, "no scenarios");

  double given = 0.0;
  std::size_t missing = 0;
  for (const auto& s : list) {
    if (!s.is_object()) malformed("each scenario must be an object");
    if (s.contains("prob")) {
      if (!s.at("prob").is_number()) malformed("'prob' must be a number");
      given += s.at("prob").get<double>();
    } else {
      ++missing;
    }
  }
  const double leftover = missing ? (1.0 - given) / static_cast<double>(missing) : 0.0;
  if (missing && leftover < -kProbabilitySumTolerance) {
    throw Error(ErrorCode::kProbabilitySum, "explicit probabilities exceed 1");
  }

  std::vector<Scenario> scenarios;
  scenarios.reserve(list.size());
  for (const auto& s : list) {
    const double p = s.contains("prob") ? s.at("prob").get<double>() : std::max(0.0, leftover);
    scenarios.emplace_back(index_list(s, "sample"), index_list(s, "target"), p, n);
  }
  std::optional<std::string> provenance;
  if (j.contains("provenance")) {
    const auto& pv = j.at("provenance");
    provenance = pv.is_string() ? pv.get<std::string>() : pv.dump();
  }
  return ScenarioDistribution(n, std::move(scenarios), std::move(provenance));
}

Json distribution_to_json(const ScenarioDistribution& dist) {
  Json out;
  out["n"] = dist.population_size();
  Json list = Json::array();
  for (const auto& s : dist.scenarios()) {
    list.push_back({{"sample", s.sample()}, {"target", s.target()}, {"prob", s.probability()}});
  }
  out["scenarios"] = std::move(list);
  if (const auto& pv = dist.provenance()) {
    // Structured provenance is kept as JSON; anything else as a string.
    const Json parsed = Json::parse(*pv, nullptr, false);
    out["provenance"] = parsed.is_object() || parsed.is_array() ? parsed : Json(*pv);
  }
  return out;
}

ScenarioDistribution load_distribution(const std::filesystem::path& path) {
  return distribution_from_json(read_json(path));
}

void save_distribution(const ScenarioDistribution& dist, const std::filesystem::path& path) {
  write_json(distribution_to_json(dist), path);
}

Json matrix_to_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const Json& j) {
  if (!j.is_array()) malformed("matrix must be an array of rows");
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = rows ? static_cast<Eigen::Index>(j.at(0).size()) : 0;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j.at(static_cast<std::size_t>(r));
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      malformed("matrix rows must be arrays of equal length");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      const auto& v = row.at(static_cast<std::size_t>(c));
      if (!v.is_number()) malformed("matrix entries must be numbers");
      m(r, c) = v.get<double>();
    }
  }
  return m;
}

SemilinearEstimator estimator_from_json(const Json& j) {
  const Index n = population(j);
  if (!j.contains("weights") || !j.at("weights").is_array()) {
    malformed("field 'weights' must be an array");
  }
  const auto& list = j.at("weights");
  std::vector<SparseVector> weights(list.size());
  std::vector<bool> filled(list.size(), false);
  for (const auto& w : list) {
    if (!w.is_object() || !w.contains("scenario") || !w.at("scenario").is_number_integer() ||
        !w.contains("entries") || !w.at("entries").is_array()) {
      malformed("weight records need integer 'scenario' and array 'entries'");
    }
    const auto idx = w.at("scenario").get<long long>();
    if (idx < 0 || static_cast<std::size_t>(idx) >= list.size() ||
        filled[static_cast<std::size_t>(idx)]) {
      malformed("scenario ids must be a permutation of 0..m-1");
    }
    std::vector<WeightEntry> entries;
    for (const auto& e : w.at("entries")) {
      if (!e.is_array() || e.size() != 2 || !e.at(0).is_number_integer() || !e.at(1).is_number()) {
        malformed("weight entries must be [index, weight] pairs");
      }
      entries.push_back({e.at(0).get<Index>(), e.at(1).get<double>()});
    }
    weights[static_cast<std::size_t>(idx)] = SparseVector(n, std::move(entries));
    filled[static_cast<std::size_t>(idx)] = true;
  }
  std::optional<Eigen::MatrixXd> V;
  if (j.contains("V") && !j.at("V").is_null()) V = matrix_from_json(j.at("V"));
  return SemilinearEstimator(n, std::move(weights), std::move(V));
}

Json estimator_to_json(const SemilinearEstimator& est) {
  Json out;
  out["n"] = est.population_size();
  Json list = Json::array();
  for (std::size_t i = 0; i < est.size(); ++i) {
    Json entries = Json::array();
    for (const auto& e : est.weights(i).entries()) entries.push_back({e.index, e.weight});
    list.push_back({{"scenario", i}, {"entries", std::move(entries)}});
  }
  out["weights"] = std::move(list);
  if (est.certificate()) out["V"] = matrix_to_json(*est.certificate());
  return out;
}

SemilinearEstimator load_estimator(const std::filesystem::path& path) {
  return estimator_from_json(read_json(path));
}

void save_estimator(const SemilinearEstimator& est, const std::filesystem::path& path) {
  write_json(estimator_to_json(est), path);
}

QueryInstance query_from_json(const Json& j) {
  if (!j.is_object()) malformed("query must be an object");
  QueryInstance q;
  q.sample = index_list(j, "sample");
  q.target = index_list(j, "target");
  if (!j.contains("x_A")) return q;
  if (!j.at("x_A").is_array()) malformed("field 'x_A' must be an array");
  for (const auto& e : j.at("x_A")) {
    if (!e.is_array() || e.size() != 2 || !e.at(0).is_number_integer() || !e.at(1).is_number()) {
      malformed("x_A entries must be [index, value] pairs");
    }
    q.observed.push_back({e.at(0).get<Index>(), e.at(1).get<double>()});
  }
  return q;
}

QueryInstance load_query(const std::filesystem::path& path) {
  return query_from_json(read_json(path));
}

DataValues load_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  std::vector<double> values;
  if (first != std::string::npos && text[first] == '[') {
    Json j;
    try {
      j = Json::parse(text);
    } catch (const Json::parse_error& e) {
      malformed(path.string() + ": " + e.what());
    }
    for (const auto& v : j) {
      if (!v.is_number()) malformed("values must be numbers");
      values.push_back(v.get<double>());
    }
  } else {
    std::istringstream lines(text);
    std::string line;
    bool first_row = true;
    while (std::getline(lines, line)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      const std::string cell = line.substr(0, line.find(','));
      try {
        std::size_t used = 0;
        values.push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        if (!first_row) malformed("non-numeric CSV value '" + cell + "'");
      }
      first_row = false;
    }
  }
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

Json audit_report_to_json(const AuditReport& report) {
  Json out = {{"sdp_upper", report.sdp_upper},
              {"rounding_lower", report.rounding_lower},
              {"best_rounded", report.best_rounded},
              {"solver_residual", report.solver_residual},
              {"exact_value", nullptr},
              {"witness_x", nullptr}};
  if (report.exact_value) out["exact_value"] = *report.exact_value;
  if (report.witness_x) {
    out["witness_x"] = std::vector<double>(report.witness_x->begin(), report.witness_x->end());
  }
  return out;
}

Eigen::MatrixXd load_csv_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  bool first_row = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    bool numeric = true;
    std::istringstream cells(line + ",");
    std::string cell;
    std::size_t count = std::count(line.begin(), line.end(), ',') + 1;
    for (std::size_t c = 0; c < count && std::getline(cells, cell, ','); ++c) {
      if (cell.find_first_not_of(" \t") == std::string::npos) {
        row.push_back(std::numeric_limits<double>::quiet_NaN());
        continue;
      }
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        numeric = false;
        break;
      }
    }
    if (!numeric) {
      if (first_row) {
        first_row = false;
        continue;
      }
      malformed("non-numeric CSV row '" + line + "'");
    }
    first_row = false;
    if (!rows.empty() && row.size() != rows.front().size()) malformed("ragged CSV rows");
    rows.push_back(std::move(row));
  }
  const Eigen::Index r = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index c = r ? static_cast<Eigen::Index>(rows.front().size()) : 0;
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    for (Eigen::Index k = 0; k < c; ++k) m(i, k) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
  }
  return m;
}

}  // namespace wcrc
