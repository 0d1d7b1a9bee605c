#include "exlab/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "exlab/stats.hpp"

namespace exlab {

void Table::add_row(std::vector<Cell> row) {
  if (row.size() != columns.size()) throw std::invalid_argument("Table: row width does not match the columns");
  rows.push_back(std::move(row));
}

bool ResultSet::all_pass() const {
  return failures.empty() && std::all_of(predicates.begin(), predicates.end(), [](const Predicate& p) { return p.pass; });
}

bool ResultSet::operator==(const ResultSet& o) const {
  return config == o.config && records == o.records && summary == o.summary &&
         csv_from_summary == o.csv_from_summary && csv_columns == o.csv_columns && aggregates == o.aggregates &&
         predicates == o.predicates && failures == o.failures && warnings == o.warnings;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

double round12(double v) {
  if (!std::isfinite(v)) return v;
  return std::strtod(format_number(v).c_str(), nullptr);
}

ResultSet normalized(const ResultSet& r) {
  ResultSet n = r;
  for (Table* t : {&n.records, &n.summary})
    for (auto& row : t->rows)
      for (auto& c : row)
        if (auto* d = std::get_if<double>(&c)) *d = round12(*d);
  for (auto& a : n.aggregates) {
    for (double* d : {&a.mean, &a.sd, &a.se, &a.ci_lo, &a.ci_hi}) *d = round12(*d);
  }
  for (auto& p : n.predicates) {
    p.value = round12(p.value);
    p.bound = round12(p.bound);
  }
  std::stable_sort(n.aggregates.begin(), n.aggregates.end(),
                   [](const Aggregate& a, const Aggregate& b) { return a.name < b.name; });
  return n;
}

Aggregate mean_aggregate(const std::string& name, const std::vector<double>& values) {
  RunningStats s;
  for (double v : values) s.add(v);
  Aggregate a;
  a.name = name;
  a.n = s.count();
  a.mean = s.mean();
  a.sd = s.count() > 1 ? s.sd() : 0.0;
  a.se = s.count() > 1 ? s.se() : 0.0;
  a.ci_lo = a.mean - 1.96 * a.se;
  a.ci_hi = a.mean + 1.96 * a.se;
  return a;
}

Aggregate proportion_aggregate(const std::string& name, std::size_t successes, std::size_t trials) {
  Aggregate a;
  a.name = name;
  a.n = trials;
  Proportion p{successes, trials};
  a.mean = trials ? p.estimate() : 0.0;
  a.se = trials ? p.se() : 0.0;
  a.sd = a.se * std::sqrt(static_cast<double>(trials));
  if (trials) {
    const auto ci = p.wilson(1.96);
    a.ci_lo = ci.lo;
    a.ci_hi = ci.hi;
  }
  return a;
}

namespace {

// Numbers go out at 12 significant digits; non-finite values as strings.
Json number_json(double v) {
  if (!std::isfinite(v)) return format_number(v);
  return round12(v);
}

double number_from(const Json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "nan") return std::nan("");
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    throw std::invalid_argument("report: bad number " + s);
  }
  return j.get<double>();
}

Json cell_json(const Cell& c) {
  if (std::holds_alternative<std::monostate>(c)) return nullptr;
  if (const auto* d = std::get_if<double>(&c)) return number_json(*d);
  return Json::object({{"text", std::get<std::string>(c)}});
}

Cell cell_from(const Json& j) {
  if (j.is_null()) return std::monostate{};
  if (j.is_object()) return j.at("text").get<std::string>();
  return number_from(j);
}

Json table_json(const Table& t) {
  Json rows = Json::array();
  for (const auto& row : t.rows) {
    Json jr = Json::array();
    for (const auto& c : row) jr.push_back(cell_json(c));
    rows.push_back(jr);
  }
  return {{"columns", t.columns}, {"rows", rows}};
}

Table table_from(const Json& j) {
  Table t;
  t.columns = j.at("columns").get<std::vector<std::string>>();
  for (const auto& jr : j.at("rows")) {
    std::vector<Cell> row;
    for (const auto& c : jr) row.push_back(cell_from(c));
    t.add_row(std::move(row));
  }
  return t;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

}  // namespace

Json report_to_json(const ResultSet& r) {
  Json j;
  j["format_version"] = kFormatVersion;
  j["config"] = r.config;
  Json results = Json::object();
  for (const auto& a : r.aggregates) {
    results[a.name] = {{"n", a.n},
                       {"mean", number_json(a.mean)},
                       {"sd", number_json(a.sd)},
                       {"se", number_json(a.se)},
                       {"ci_lo", number_json(a.ci_lo)},
                       {"ci_hi", number_json(a.ci_hi)}};
  }
  j["results"] = results;
  Json preds = Json::array();
  for (const auto& p : r.predicates)
    preds.push_back({{"name", p.name}, {"value", number_json(p.value)}, {"bound", number_json(p.bound)}, {"pass", p.pass}});
  j["predicates"] = preds;
  j["records"] = table_json(r.records);
  j["summary"] = table_json(r.summary);
  j["csv_table"] = r.csv_from_summary ? "summary" : "records";
  j["csv_columns"] = r.csv_columns;
  Json fails = Json::array();
  for (const auto& f : r.failures) fails.push_back({{"replica", f.replica}, {"message", f.message}});
  j["failures"] = fails;
  j["warnings"] = r.warnings;
  j["pass"] = r.all_pass();
  return j;
}

ResultSet report_from_json(const Json& j) {
  if (j.value("format_version", "") != kFormatVersion) throw std::invalid_argument("report: unknown format_version");
  ResultSet r;
  r.config = j.at("config");
  for (const auto& [name, a] : j.at("results").items()) {
    Aggregate g;
    g.name = name;
    g.n = a.at("n").get<std::size_t>();
    g.mean = number_from(a.at("mean"));
    g.sd = number_from(a.at("sd"));
    g.se = number_from(a.at("se"));
    g.ci_lo = number_from(a.at("ci_lo"));
    g.ci_hi = number_from(a.at("ci_hi"));
    r.aggregates.push_back(g);
  }
  for (const auto& p : j.at("predicates"))
    r.predicates.push_back({p.at("name").get<std::string>(), number_from(p.at("value")), number_from(p.at("bound")),
                            p.at("pass").get<bool>()});
  r.records = table_from(j.at("records"));
  r.summary = table_from(j.at("summary"));
  r.csv_from_summary = j.at("csv_table").get<std::string>() == "summary";
  r.csv_columns = j.at("csv_columns").get<std::vector<std::string>>();
  for (const auto& f : j.at("failures")) r.failures.push_back({f.at("replica").get<std::size_t>(), f.at("message").get<std::string>()});
  r.warnings = j.at("warnings").get<std::vector<std::string>>();
  return r;
}

std::string report_json_text(const ResultSet& r) {
  // Aggregates are keyed by name; sort them so the object order and the
  // round-trip order agree.
  ResultSet s = r;
  std::stable_sort(s.aggregates.begin(), s.aggregates.end(),
                   [](const Aggregate& a, const Aggregate& b) { return a.name < b.name; });
  return report_to_json(s).dump(2) + "\n";
}

std::string report_csv_text(const ResultSet& r) {
  const Table& t = r.csv_from_summary ? r.summary : r.records;
  std::vector<std::size_t> idx;
  for (const auto& c : r.csv_columns) {
    const auto it = std::find(t.columns.begin(), t.columns.end(), c);
    if (it == t.columns.end()) throw std::invalid_argument("report: csv column '" + c + "' not in the table");
    idx.push_back(static_cast<std::size_t>(it - t.columns.begin()));
  }
  std::string out;
  for (std::size_t k = 0; k < r.csv_columns.size(); ++k) out += (k ? "," : "") + csv_escape(r.csv_columns[k]);
  out += "\n";
  for (const auto& row : t.rows) {
    for (std::size_t k = 0; k < idx.size(); ++k) {
      if (k) out += ",";
      const Cell& c = row[idx[k]];
      if (const auto* d = std::get_if<double>(&c)) out += format_number(*d);
      else if (const auto* s = std::get_if<std::string>(&c)) out += csv_escape(*s);
    }
    out += "\n";
  }
  return out;
}

void emit_report(const ResultSet& r, ReportFormat format, const std::filesystem::path& path) {
  const std::string text = format == ReportFormat::json ? report_json_text(r) : report_csv_text(r);
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw std::runtime_error("emit_report: cannot create directory for " + path.string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("emit_report: cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) throw std::runtime_error("emit_report: write failed for " + path.string());
}

}  // namespace exlab
