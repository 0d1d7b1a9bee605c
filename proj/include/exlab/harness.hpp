#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "exlab/lattice.hpp"
#include "exlab/report.hpp"
#include "exlab/sde.hpp"

namespace exlab {

enum class ExperimentKind { sde1d, ladder, zeroset, lattice_support, coupling, bvp };

const char* kind_name(ExperimentKind k);
// Accepts both lattice_support and lattice-support.
ExperimentKind parse_kind(std::string_view name);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::sde1d;
  Json model = Json::object();  // kind-specific parameters, see README
  std::size_t replicas = 1;
  double dt = 1e-3;
  double horizon = 1.0;
  std::uint64_t seed = 1;
  std::string output;  // report stem: <output>.json and <output>.csv

  static ExperimentConfig from_json(const Json& j);
  Json to_json() const;
  // Checks the top-level fields and parses the model without running anything.
  void validate() const;
};

ExperimentConfig load_config(const std::filesystem::path& path);

// Deterministic for a given config: the thread count never changes the result.
ResultSet run_ensemble(const ExperimentConfig& config, unsigned threads = 0);

// Writes <stem>.json and <stem>.csv.
void emit_reports(const ResultSet& r, const std::string& stem);

// Model pieces shared by the drivers and the lattice JSON interface.
NoiseSpec noise_from_json(const Json& model);
JumpKernel kernel_from_json(const Json& model);
DriftSpec drift_from_json(const Json& model);
Scheme scheme_from_json(const Json& model);

// {dim, box_radius, rates:[{offset, rate}], x0:[{site, mass}]}; rates may be
// replaced by {"nearest_neighbour": total_rate}.
struct LatticeSetup {
  JumpKernel kernel;
  LatticeState x0;
};
LatticeSetup lattice_setup_from_json(const Json& j);

}  // namespace exlab
