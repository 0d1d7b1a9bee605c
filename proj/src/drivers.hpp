#pragma once

#include <initializer_list>
#include <optional>
#include <string>
#include <vector>

#include "exlab/harness.hpp"
#include "exlab/ladder.hpp"
#include "exlab/parallel.hpp"

namespace exlab::detail {

void validate_model(const ExperimentConfig& config);

ResultSet run_sde1d(const ExperimentConfig& config, unsigned threads);
ResultSet run_ladder(const ExperimentConfig& config, unsigned threads);
ResultSet run_zeroset(const ExperimentConfig& config, unsigned threads);
ResultSet run_lattice(const ExperimentConfig& config, unsigned threads);
ResultSet run_coupling(const ExperimentConfig& config, unsigned threads);
ResultSet run_bvp(const ExperimentConfig& config);

// Per-kind model checks, shared by validate_model and the drivers.
void check_sde1d(const ExperimentConfig& config);
void check_ladder(const ExperimentConfig& config);
void check_zeroset(const ExperimentConfig& config);
void check_lattice(const ExperimentConfig& config);
void check_coupling(const ExperimentConfig& config);
void check_bvp(const ExperimentConfig& config);

// Helpers.
void check_keys(const Json& model, std::initializer_list<const char*> allowed);
std::string experiment_of(const Json& model, const char* fallback, std::initializer_list<const char*> allowed);
double positive(const Json& model, const char* key, std::optional<double> fallback = std::nullopt);
std::vector<double> number_list(const Json& model, const char* key, std::vector<double> fallback);
RunOptions run_options(const Json& model, unsigned threads);
SdeParams sde_params(const Json& model);

Cell opt_cell(std::optional<double> v);

// Summary table with the columns experiment, index, estimate, stderr,
// envelope_lo, envelope_hi, pass.
void init_summary(ResultSet& r);
void add_check(ResultSet& r, const std::string& experiment, double index, double estimate, std::optional<double> se,
               std::optional<double> lo, std::optional<double> hi, bool pass, double bound);
// estimate in [lo, hi] (open when strict); a missing side is unbounded.
bool envelope(ResultSet& r, const std::string& experiment, double index, double estimate, std::optional<double> se,
              std::optional<double> lo, std::optional<double> hi, bool strict = false);

void note_failures(ResultSet& r, const std::vector<ReplicaFailure>& failures);
void add_aggregate(ResultSet& r, Aggregate a);

}  // namespace exlab::detail
