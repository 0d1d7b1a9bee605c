#include "drivers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace exlab::detail {

void validate_model(const ExperimentConfig& config) {
  switch (config.kind) {
    case ExperimentKind::sde1d: check_sde1d(config); break;
    case ExperimentKind::ladder: check_ladder(config); break;
    case ExperimentKind::zeroset: check_zeroset(config); break;
    case ExperimentKind::lattice_support: check_lattice(config); break;
    case ExperimentKind::coupling: check_coupling(config); break;
    case ExperimentKind::bvp: check_bvp(config); break;
  }
}

void check_keys(const Json& model, std::initializer_list<const char*> allowed) {
  for (const auto& [key, v] : model.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      throw std::invalid_argument("model: unknown key '" + key + "'");
  }
}

std::string experiment_of(const Json& model, const char* fallback, std::initializer_list<const char*> allowed) {
  const std::string e = model.value("experiment", std::string(fallback));
  if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return e == a; }))
    throw std::invalid_argument("model: unknown experiment '" + e + "'");
  return e;
}

double positive(const Json& model, const char* key, std::optional<double> fallback) {
  if (!model.contains(key)) {
    if (!fallback) throw std::invalid_argument(std::string("model: missing '") + key + "'");
    return *fallback;
  }
  const double v = model.at(key).get<double>();
  if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string("model: '") + key + "' must be positive");
  return v;
}

std::vector<double> number_list(const Json& model, const char* key, std::vector<double> fallback) {
  if (!model.contains(key)) return fallback;
  const auto& j = model.at(key);
  if (!j.is_array() || j.empty()) throw std::invalid_argument(std::string("model: '") + key + "' must be a non-empty list");
  std::vector<double> out;
  for (const auto& v : j) {
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw std::invalid_argument(std::string("model: '") + key + "' entries must be finite");
    out.push_back(x);
  }
  return out;
}

RunOptions run_options(const Json& model, unsigned threads) {
  RunOptions o;
  o.scheme = scheme_from_json(model);
  o.bridge = model.value("bridge", true);
  o.threads = threads;
  return o;
}

SdeParams sde_params(const Json& model) {
  SdeParams p;
  p.delta = model.value("delta", 0.0);
  if (!(p.delta >= 0.0) || !std::isfinite(p.delta)) throw std::invalid_argument("model: delta must be >= 0");
  p.noise = noise_from_json(model);
  p.z0 = model.value("z0", 0.0);
  if (!(p.z0 >= 0.0) || !std::isfinite(p.z0)) throw std::invalid_argument("model: z0 must be >= 0");
  return p;
}

Cell opt_cell(std::optional<double> v) {
  if (!v) return std::monostate{};
  return *v;
}

void init_summary(ResultSet& r) {
  r.summary.columns = {"experiment", "index", "estimate", "stderr", "envelope_lo", "envelope_hi", "pass"};
  r.csv_from_summary = true;
  r.csv_columns = r.summary.columns;
}

void add_check(ResultSet& r, const std::string& experiment, double index, double estimate, std::optional<double> se,
               std::optional<double> lo, std::optional<double> hi, bool pass, double bound) {
  r.summary.add_row({experiment, index, estimate, opt_cell(se), opt_cell(lo), opt_cell(hi), pass ? 1.0 : 0.0});
  r.predicates.push_back({experiment + "[" + format_number(index) + "]", estimate, bound, pass});
}

bool envelope(ResultSet& r, const std::string& experiment, double index, double estimate, std::optional<double> se,
              std::optional<double> lo, std::optional<double> hi, bool strict) {
  const bool above = !lo || (strict ? estimate > *lo : estimate >= *lo);
  const bool below = !hi || (strict ? estimate < *hi : estimate <= *hi);
  const bool pass = std::isfinite(estimate) && above && below;
  const double bound = (lo && (!above || !hi)) ? *lo : (hi ? *hi : 0.0);
  add_check(r, experiment, index, estimate, se, lo, hi, pass, bound);
  return pass;
}

void note_failures(ResultSet& r, const std::vector<ReplicaFailure>& failures) {
  for (const auto& f : failures) r.failures.push_back({f.replica, f.message});
  if (!failures.empty()) {
    r.predicates.push_back({"replica_failures", static_cast<double>(failures.size()), 0.0, false});
  }
}

void add_aggregate(ResultSet& r, Aggregate a) { r.aggregates.push_back(std::move(a)); }

}  // namespace exlab::detail
