#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

namespace exlab {

using Json = nlohmann::json;

inline constexpr const char* kFormatVersion = "exlab-report/1";

// Empty cells are missing values (e.g. a stopping time that never occurred).
using Cell = std::variant<std::monostate, double, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add_row(std::vector<Cell> row);
  bool operator==(const Table&) const = default;
};

struct Aggregate {
  std::string name;
  std::size_t n = 0;
  double mean = 0.0;
  double sd = 0.0;
  double se = 0.0;
  double ci_lo = 0.0;  // Wilson for proportions, mean +- 1.96 se otherwise
  double ci_hi = 0.0;
  bool operator==(const Aggregate&) const = default;
};

struct Predicate {
  std::string name;
  double value = 0.0;
  double bound = 0.0;
  bool pass = false;
  bool operator==(const Predicate&) const = default;
};

struct Failure {
  std::size_t replica = 0;
  std::string message;
  bool operator==(const Failure&) const = default;
};

struct ResultSet {
  Json config;
  Table records;  // per-replica data
  Table summary;  // per-estimate rows
  bool csv_from_summary = false;
  std::vector<std::string> csv_columns;  // declared CSV schema; subset of the chosen table's columns
  std::vector<Aggregate> aggregates;
  std::vector<Predicate> predicates;
  std::vector<Failure> failures;
  std::vector<std::string> warnings;
  double wall_seconds = 0.0;  // not emitted, so reports stay byte-stable

  bool all_pass() const;
  bool operator==(const ResultSet& o) const;
};

// Values as they appear in a report: %.12g, aggregates sorted by name.
double round12(double v);
ResultSet normalized(const ResultSet& r);

Aggregate mean_aggregate(const std::string& name, const std::vector<double>& values);
Aggregate proportion_aggregate(const std::string& name, std::size_t successes, std::size_t trials);

std::string format_number(double v);

enum class ReportFormat { csv, json };

Json report_to_json(const ResultSet& r);
ResultSet report_from_json(const Json& j);
std::string report_json_text(const ResultSet& r);
std::string report_csv_text(const ResultSet& r);

// Writes the report; errors carry the path.
void emit_report(const ResultSet& r, ReportFormat format, const std::filesystem::path& path);

}  // namespace exlab
