#include "exlab/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iterator>
#include <stdexcept>

#include "drivers.hpp"

namespace exlab {

const char* kind_name(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::sde1d: return "sde1d";
    case ExperimentKind::ladder: return "ladder";
    case ExperimentKind::zeroset: return "zeroset";
    case ExperimentKind::lattice_support: return "lattice_support";
    case ExperimentKind::coupling: return "coupling";
    case ExperimentKind::bvp: return "bvp";
  }
  return "?";
}

ExperimentKind parse_kind(std::string_view name) {
  if (name == "sde1d") return ExperimentKind::sde1d;
  if (name == "ladder") return ExperimentKind::ladder;
  if (name == "zeroset") return ExperimentKind::zeroset;
  if (name == "lattice_support" || name == "lattice-support") return ExperimentKind::lattice_support;
  if (name == "coupling") return ExperimentKind::coupling;
  if (name == "bvp") return ExperimentKind::bvp;
  throw std::invalid_argument("unknown experiment kind: " + std::string(name));
}

ExperimentConfig ExperimentConfig::from_json(const Json& j) {
  if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");
  static const char* known[] = {"kind", "model", "replicas", "dt", "horizon", "seed", "output"};
  for (const auto& [key, v] : j.items()) {
    if (std::find_if(std::begin(known), std::end(known), [&](const char* k) { return key == k; }) == std::end(known))
      throw std::invalid_argument("config: unknown key '" + key + "'");
  }
  ExperimentConfig c;
  c.kind = parse_kind(j.at("kind").get<std::string>());
  if (j.contains("model")) c.model = j.at("model");
  if (!c.model.is_object()) throw std::invalid_argument("config: model must be an object");
  if (j.contains("replicas")) {
    const auto& r = j.at("replicas");
    if (!r.is_number_integer() || r.get<long long>() < 1) throw std::invalid_argument("config: replicas must be an integer >= 1");
    c.replicas = r.get<std::size_t>();
  }
  c.dt = j.value("dt", c.dt);
  c.horizon = j.value("horizon", c.horizon);
  if (j.contains("seed")) {
    const auto& s = j.at("seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0))
      throw std::invalid_argument("config: seed must be a non-negative 64-bit integer");
    c.seed = s.get<std::uint64_t>();
  }
  c.output = j.value("output", std::string{});
  return c;
}

Json ExperimentConfig::to_json() const {
  return Json{{"kind", kind_name(kind)}, {"model", model},     {"replicas", replicas}, {"dt", dt},
              {"horizon", horizon},      {"seed", seed},       {"output", output}};
}

void ExperimentConfig::validate() const {
  if (replicas < 1) throw std::invalid_argument("config: replicas must be >= 1");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("config: dt must be positive");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw std::invalid_argument("config: horizon must be positive");
  detail::validate_model(*this);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  Json j;
  try {
    in >> j;
  } catch (const Json::exception& e) {
    throw std::runtime_error("cannot parse config " + path.string() + ": " + e.what());
  }
  return ExperimentConfig::from_json(j);
}

ResultSet run_ensemble(const ExperimentConfig& config, unsigned threads) {
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();
  ResultSet r;
  try {
    switch (config.kind) {
      case ExperimentKind::sde1d: r = detail::run_sde1d(config, threads); break;
      case ExperimentKind::ladder: r = detail::run_ladder(config, threads); break;
      case ExperimentKind::zeroset: r = detail::run_zeroset(config, threads); break;
      case ExperimentKind::lattice_support: r = detail::run_lattice(config, threads); break;
      case ExperimentKind::coupling: r = detail::run_coupling(config, threads); break;
      case ExperimentKind::bvp: r = detail::run_bvp(config); break;
    }
  } catch (const EnsembleError& e) {
    // Raised by module-level ensembles, which keep no partial results.
    r = ResultSet{};
    detail::note_failures(r, e.failures());
  }
  r.config = config.to_json();
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

void emit_reports(const ResultSet& r, const std::string& stem) {
  emit_report(r, ReportFormat::json, stem + ".json");
  emit_report(r, ReportFormat::csv, stem + ".csv");
}

NoiseSpec noise_from_json(const Json& model) {
  const double gamma = model.value("gamma", 0.25);
  NoiseSpec n = NoiseSpec::power(gamma);
  if (model.contains("noise")) {
    const auto& j = model.at("noise");
    const std::string mode = j.value("mode", "pure_power");
    if (mode == "table") {
      std::vector<std::pair<double, double>> knots;
      for (const auto& k : j.at("knots")) knots.emplace_back(k.at(0).get<double>(), k.at(1).get<double>());
      n = NoiseSpec::from_table(gamma, j.value("theta", gamma), j.value("c_growth", 1.0), std::move(knots));
    } else if (mode == "zero") {
      n = NoiseSpec::zero(gamma);
    } else if (mode != "pure_power") {
      throw std::invalid_argument("noise: unknown mode " + mode);
    }
  }
  n.validate();
  return n;
}

JumpKernel kernel_from_json(const Json& model) {
  const int dim = model.value("dim", 1);
  if (model.contains("rates")) {
    std::vector<std::pair<Coord, double>> rates;
    for (const auto& e : model.at("rates")) rates.emplace_back(e.at("offset").get<Coord>(), e.at("rate").get<double>());
    return JumpKernel::from_rates(dim, std::move(rates), model.value("symmetric", true));
  }
  const Json k = model.value("kernel", Json::object());
  if (k.contains("exponential")) {
    // q(j) proportional to exp(-|j|/scale) along the first axis, |j| <= max_offset.
    const auto& e = k.at("exponential");
    const double scale = e.at("scale").get<double>();
    const double total = e.value("total_rate", 1.0);
    const int max_off = e.value("max_offset", 100);
    if (!(scale > 0.0) || max_off < 1) throw std::invalid_argument("kernel: bad exponential parameters");
    std::vector<std::pair<Coord, double>> rates;
    double s = 0.0;
    for (int j = 1; j <= max_off; ++j) {
      const double q = std::exp(-j / scale);
      for (int sign : {1, -1}) {
        Coord off(static_cast<std::size_t>(dim), 0);
        off[0] = sign * j;
        rates.emplace_back(off, q);
      }
      s += 2.0 * q;
    }
    for (auto& r : rates) r.second *= total / s;
    return JumpKernel::from_rates(dim, std::move(rates), true);
  }
  return JumpKernel::nearest_neighbour(dim, k.value("nearest_neighbour", 1.0));
}

DriftSpec drift_from_json(const Json& model) {
  if (!model.contains("drift")) return DriftSpec::zero();
  const auto& j = model.at("drift");
  const std::string mode = j.value("mode", "zero");
  if (mode == "zero") return DriftSpec::zero();
  if (mode == "linear") {
    auto f = DriftSpec::linear(j.at("a").get<double>());
    if (j.contains("L")) f.lipschitz_L = j.at("L").get<double>();
    f.validate();
    return f;
  }
  if (mode == "table") {
    std::vector<std::pair<double, double>> knots;
    for (const auto& k : j.at("knots")) knots.emplace_back(k.at(0).get<double>(), k.at(1).get<double>());
    return DriftSpec::from_table(j.at("L").get<double>(), std::move(knots));
  }
  throw std::invalid_argument("drift: unknown mode " + mode);
}

Scheme scheme_from_json(const Json& model) { return parse_scheme(model.value("scheme", std::string("near_zero_ladder"))); }

LatticeSetup lattice_setup_from_json(const Json& j) {
  LatticeSetup s;
  s.kernel = kernel_from_json(j);
  const int dim = j.value("dim", 1);
  const int radius = j.at("box_radius").get<int>();
  s.x0 = LatticeState::zeros(dim, radius);
  const Box box = s.x0.box();
  if (j.contains("x0")) {
    for (const auto& e : j.at("x0")) {
      const double m = e.at("mass").get<double>();
      if (!(m >= 0.0) || !std::isfinite(m)) throw std::invalid_argument("x0: masses must be finite and >= 0");
      s.x0.values[box.index(e.at("site").get<Coord>())] += m;
    }
  } else {
    s.x0.values[box.origin()] = 1.0;
  }
  if (s.kernel.dim != dim) throw std::invalid_argument("lattice: kernel and box dimensions differ");
  return s;
}

}  // namespace exlab
