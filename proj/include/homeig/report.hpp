#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "homeig/continuation.hpp"
#include "homeig/errors.hpp"
#include "homeig/evaluation.hpp"
#include "homeig/operator_core.hpp"
#include "homeig/series.hpp"
#include "homeig/validation.hpp"

namespace homeig {

inline constexpr const char* kToolName = "homeig";
inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kReportSchema = 1;

/// Run parameters as echoed into the report metadata.
struct RunConfig {
  std::string command = "solve";
  std::string k_path;
  std::string l_path;
  std::string basis_path;
  std::string basis_values_path;
  std::size_t order = 20;
  double theta = 1.0;
  std::string stages = "4";  // count or "auto"
  double safety = 0.5;
  Tolerances tolerances;
  double convergence_tol = 1e-9;
  std::string format = "json";
  bool with_oracle = false;
  std::string output_path;
};

namespace detail {

// JSON has no infinities; they are written as the strings "inf" / "-inf".
inline nlohmann::json number(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return "nan";
  return x;
}

inline double number_from(const nlohmann::json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    throw Error("report: unexpected numeric string '" + s + "'");
  }
  return j.get<double>();
}

inline nlohmann::json numbers(std::span<const double> xs) {
  auto arr = nlohmann::json::array();
  for (double x : xs) arr.push_back(number(x));
  return arr;
}

inline Vector numbers_from(const nlohmann::json& j) {
  Vector out;
  for (const auto& x : j) out.push_back(number_from(x));
  return out;
}

}  // namespace detail

inline nlohmann::json meta_json(const RunConfig& config, std::size_t n) {
  nlohmann::json meta = {
      {"tool", kToolName},
      {"version", kToolVersion},
      {"command", config.command},
      {"k_path", config.k_path},
      {"l_path", config.l_path},
      {"basis_path", config.basis_path},
      {"basis_values_path", config.basis_values_path},
      {"n", n},
      {"order", config.order},
      {"theta", config.theta},
      {"tolerances",
       {{"ortho", config.tolerances.ortho},
        {"eig", config.tolerances.eig},
        {"gap", config.tolerances.gap},
        {"sym", config.tolerances.sym},
        {"convergence", config.convergence_tol}}},
      {"with_oracle", config.with_oracle},
      {"diagnostics", "radius_estimate, tail_estimate and converged are heuristic"},
  };
  if (config.command == "stage") {
    meta["stages"] = config.stages;
    meta["safety"] = config.safety;
  }
  return meta;
}

inline nlohmann::json result_json(const EigenpairResult& r) {
  return {
      {"index", r.index + 1},
      {"theta", detail::number(r.theta)},
      {"lambda_coefficients", detail::numbers(r.lambda_coefficients)},
      {"lambda_at_theta", detail::number(r.lambda_value)},
      {"eigenvector", detail::numbers(r.vector)},
      {"gauge_vector", detail::numbers(r.raw_gauge_vector)},
      {"residual", detail::number(r.residual)},
      {"radius_estimate", detail::number(r.radius_estimate)},
      {"tail_estimate", detail::number(r.tail_estimate)},
      {"converged", r.converged},
  };
}

inline nlohmann::json comparison_json(const OracleComparison& c) {
  return {
      {"oracle_lambda", detail::number(c.oracle_lambda)},
      {"lambda_error", detail::number(c.lambda_error)},
      {"vector_error", detail::number(c.vector_error)},
      {"min_overlap", detail::number(c.min_overlap)},
      {"ambiguous", c.ambiguous},
  };
}

inline nlohmann::json stages_json(std::span<const StageReport> stages) {
  auto arr = nlohmann::json::array();
  for (const auto& s : stages)
    arr.push_back({{"theta_start", s.theta_start},
                   {"theta_end", s.theta_end},
                   {"local_t", s.local_t},
                   {"min_radius", detail::number(s.min_radius)},
                   {"max_tail", detail::number(s.max_tail)}});
  return arr;
}

/// {"schema": 1, "meta": {...}, "results": [...]}. Comparisons, when given, are merged into
/// the matching result objects under "oracle".
inline nlohmann::json report_json(const std::vector<EigenpairResult>& results,
                                  const RunConfig& config,
                                  const std::vector<OracleComparison>* comparisons = nullptr) {
  if (results.empty()) throw InvalidArgument("report needs at least one result");
  nlohmann::json doc;
  doc["schema"] = kReportSchema;
  doc["meta"] = meta_json(config, results.front().vector.size());
  auto arr = nlohmann::json::array();
  for (std::size_t p = 0; p < results.size(); ++p) {
    auto item = result_json(results[p]);
    if (comparisons) item["oracle"] = comparison_json((*comparisons)[p]);
    arr.push_back(std::move(item));
  }
  doc["results"] = std::move(arr);
  return doc;
}

inline std::string write_report(const std::vector<EigenpairResult>& results,
                                const RunConfig& config) {
  return report_json(results, config).dump(2) + "\n";
}

struct ParsedReport {
  int schema = 0;
  nlohmann::json meta;
  std::vector<EigenpairResult> results;
};

inline ParsedReport read_report(std::string_view text) {
  const auto doc = nlohmann::json::parse(text);
  ParsedReport out;
  out.schema = doc.at("schema").get<int>();
  if (out.schema != kReportSchema)
    throw Error("report: unsupported schema " + std::to_string(out.schema));
  out.meta = doc.at("meta");
  for (const auto& item : doc.at("results")) {
    EigenpairResult r;
    r.index = item.at("index").get<std::size_t>() - 1;
    r.theta = detail::number_from(item.at("theta"));
    r.lambda_coefficients = detail::numbers_from(item.at("lambda_coefficients"));
    r.lambda_value = detail::number_from(item.at("lambda_at_theta"));
    r.vector = detail::numbers_from(item.at("eigenvector"));
    r.raw_gauge_vector = detail::numbers_from(item.at("gauge_vector"));
    r.residual = detail::number_from(item.at("residual"));
    r.radius_estimate = detail::number_from(item.at("radius_estimate"));
    r.tail_estimate = detail::number_from(item.at("tail_estimate"));
    r.converged = item.at("converged").get<bool>();
    out.results.push_back(std::move(r));
  }
  return out;
}

/// a and b tensors; b[i][k] lists b(i,k,0..R). Indices in the document are positional.
inline nlohmann::json coefficients_json(const SeriesCoefficients& c) {
  nlohmann::json doc;
  doc["n"] = c.size();
  doc["order"] = c.order();
  doc["base_values"] = detail::numbers(c.base_values());
  auto a = nlohmann::json::array();
  auto b = nlohmann::json::array();
  for (std::size_t i = 0; i < c.size(); ++i) {
    a.push_back(detail::numbers(c.lambda_series(i)));
    auto bi = nlohmann::json::array();
    for (std::size_t k = 0; k < c.size(); ++k) bi.push_back(detail::numbers(c.coordinate_series(i, k)));
    b.push_back(std::move(bi));
  }
  doc["a"] = std::move(a);
  doc["b"] = std::move(b);
  return doc;
}

inline constexpr std::string_view kTrajectoryHeader = "theta,index,lambda_series,lambda_oracle,residual";

namespace detail {

inline std::string csv_number(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return "nan";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

inline double csv_parse(std::string_view s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw Error("trajectory csv: bad number '" + std::string(s) + "'");
  return v;
}

}  // namespace detail

/// Header line then one row per (theta, index); the oracle column is empty when absent.
inline std::string write_trajectory_csv(const TrajectoryTable& table) {
  std::string out(kTrajectoryHeader);
  out += '\n';
  for (const auto& row : table.rows) {
    out += detail::csv_number(row.theta);
    out += ',';
    out += std::to_string(row.index + 1);
    out += ',';
    out += detail::csv_number(row.lambda_series);
    out += ',';
    if (row.lambda_oracle) out += detail::csv_number(*row.lambda_oracle);
    out += ',';
    out += detail::csv_number(row.residual);
    out += '\n';
  }
  return out;
}

inline TrajectoryTable read_trajectory_csv(std::string_view text) {
  TrajectoryTable table;
  std::size_t start = 0;
  bool header = true;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(start, end - start);
    start = end + 1;
    if (header) {
      if (line != kTrajectoryHeader) throw Error("trajectory csv: unexpected header");
      header = false;
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string_view> fields;
    std::size_t p = 0;
    while (true) {
      const std::size_t q = line.find(',', p);
      fields.push_back(line.substr(p, q == std::string_view::npos ? std::string_view::npos : q - p));
      if (q == std::string_view::npos) break;
      p = q + 1;
    }
    if (fields.size() != 5) throw Error("trajectory csv: expected 5 fields");
    TrajectoryRow row;
    row.theta = detail::csv_parse(fields[0]);
    row.index = static_cast<std::size_t>(detail::csv_parse(fields[1])) - 1;
    row.lambda_series = detail::csv_parse(fields[2]);
    if (!fields[3].empty()) row.lambda_oracle = detail::csv_parse(fields[3]);
    row.residual = detail::csv_parse(fields[4]);
    table.rows.push_back(row);
  }
  if (header) throw Error("trajectory csv: missing header");
  return table;
}

}  // namespace homeig
