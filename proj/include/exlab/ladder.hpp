#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "exlab/random.hpp"
#include "exlab/sde.hpp"
#include "exlab/stats.hpp"

namespace exlab {

// Dyadic levels a_n = zeta 2^-n, n = 0..depth.
struct LadderConfig {
  double zeta = 1e-2;
  int depth = 1;

  double level(int n) const;
  void validate() const;
};

struct EmbeddedWalk {
  std::vector<int> s;
  std::vector<double> sigma_times;
};

EmbeddedWalk embedded_walk(const Path1D& path, const LadderConfig& config);

struct RunOptions {
  Scheme scheme = Scheme::near_zero_ladder;
  bool bridge = true;  // Brownian-bridge check for crossings between grid points
  unsigned threads = 0;
};

// Probability that a Brownian bridge from z0 to z1 over dt with volatility s
// touches `level`; 1 if the endpoints straddle it.
double bridge_cross_probability(double z0, double z1, double level, double s, double dt);

enum class ExitKind { up, down, censored };

struct ExitOutcome {
  ExitKind kind = ExitKind::censored;
  double time = 0.0;
};

// First exit of (lo, hi) from z0 under dZ = delta dt + sigma dB. lo == 0 is
// detected through exact zeros.
ExitOutcome run_to_exit(const Stepper& stepper, double delta, double z0, double lo, double hi,
                        std::size_t max_steps, RngStream& rng, bool bridge);

struct IntervalExitStats {
  int n = 0;
  double a_n = 0.0;
  double time_scale = 0.0;  // a_n^{2-2 gamma}
  Proportion up;
  RunningStats exit_time;  // uncensored exits
  std::vector<Proportion> tail;  // P(exit > m time_scale), m = 1..10
  std::size_t censored = 0;
  std::vector<std::string> warnings;
  std::vector<ExitOutcome> outcomes;  // replica order
};

IntervalExitStats interval_exit_stats(const SdeParams& params, const LadderConfig& config, int n,
                                      std::size_t replicas, double dt, std::uint64_t seed,
                                      const RunOptions& opt = {});

struct HittingStats {
  Proportion up;
  RunningStats exit_time;
  std::size_t censored = 0;
  std::vector<std::string> warnings;
  std::vector<ExitOutcome> outcomes;  // replica order
};

// P(hit 2 zeta before 0) from zeta.
HittingStats two_zeta_hitting(const SdeParams& params, double zeta, std::size_t replicas, double dt,
                              std::uint64_t seed, const RunOptions& opt = {});

struct ExcursionStats {
  int depth = 0;
  double zeta = 0.0;
  std::vector<int> height;         // H per excursion
  std::vector<double> duration;    // tau_0, or elapsed time when censored
  std::vector<std::uint8_t> censored;

  std::size_t replicas() const { return height.size(); }
  Proportion height_at_least(int k) const;
  std::size_t censored_count() const;
};

// Excursions from zeta run to absorption at 0; H counts levels 2^{m-1} zeta
// reached, censored at the top level 2^{depth-1} zeta.
ExcursionStats excursion_heights(const SdeParams& params, const LadderConfig& config, std::size_t replicas,
                                 double dt, std::uint64_t seed, const RunOptions& opt = {});

struct UpLegStats {
  std::vector<double> times;  // uncensored legs
  std::size_t censored = 0;
  std::vector<ExitOutcome> outcomes;  // replica order
};

// Times for the process started at 0 to reach zeta.
UpLegStats up_leg_times(double delta, const NoiseSpec& noise, double zeta, std::size_t replicas, double dt,
                        std::uint64_t seed, const RunOptions& opt = {});

struct DowncrossRecord {
  double t0 = 0.0;
  std::vector<double> tau;    // visits to zeta
  std::vector<double> gamma;  // subsequent returns to 0

  std::size_t count_at(double t) const;
};

DowncrossRecord downcrossings(const Path1D& path, double zeta, double horizon);

// Streaming downcrossing detection for a process advanced step by step.
class DowncrossCounter {
 public:
  DowncrossCounter(double zeta, bool bridge, bool keep_times = false);

  // One grid step from (t, z0) to (t + dt, z1).
  void push(double t, double dt, double z0, double z1, bool touched_zero, double sigma0, RngStream& rng);

  std::size_t count() const { return count_; }
  const DowncrossRecord& record() const { return record_; }

 private:
  double zeta_;
  bool bridge_;
  bool keep_;
  bool seeking_zero_ = false;
  std::size_t count_ = 0;
  DowncrossRecord record_;
};

struct UpDown {
  double t_up = 0.0;
  double t_down = 0.0;
  std::size_t used = 0;
  bool complete = false;
};

UpDown updown_decomposition(const DowncrossRecord& record, std::size_t n);

struct ZeroSetEstimates {
  std::vector<double> zetas;
  double delta = 0.0;
  double horizon = 0.0;
  double eps = 0.0;
  std::vector<std::vector<double>> downcross;  // [path][zeta]: zeta N_zeta(horizon) / delta
  std::vector<double> occupation;              // [path]

  RunningStats downcross_stats(std::size_t j) const;
  RunningStats occupation_stats() const;
  void add(const Path1D& path);
};

ZeroSetEstimates zero_set_measure(const std::vector<Path1D>& paths, const std::vector<double>& zetas,
                                  double delta, double horizon, double eps);

// Length of the longest run of exact zero samples, (count - 1) dt.
double longest_zero_run(const Path1D& path);

}  // namespace exlab
