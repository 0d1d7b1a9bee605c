#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "exlab/random.hpp"

namespace exlab {

enum class NoiseMode { pure_power, user_table, degenerate };

// Diffusion coefficient sigma. `degenerate` is sigma == 0, used as a test hook.
struct NoiseSpec {
  double gamma = 0.25;
  double theta = 0.25;
  double c_growth = 1.0;
  NoiseMode mode = NoiseMode::pure_power;
  // (x, sigma(x)) knots with increasing x > 0; sigma is linear between knots,
  // x^gamma-shaped below the first knot and linear through 0 above the last.
  std::vector<std::pair<double, double>> table;

  static NoiseSpec power(double gamma);
  static NoiseSpec zero(double gamma = 0.25);
  static NoiseSpec from_table(double gamma, double theta, double c_growth,
                              std::vector<std::pair<double, double>> knots);

  double operator()(double x) const {
    if (mode == NoiseMode::pure_power) return x > 0.0 ? std::pow(x, gamma) : 0.0;
    return eval_slow(x);
  }

  // Throws std::invalid_argument when an invariant fails on the sample grid.
  void validate() const;

  // Prefactor A with sigma(x) = A x^gamma near 0.
  double small_x_prefactor() const;

  // E_x of the exit time from (a, c) for dZ = sigma(Z) dB.
  double mean_exit_time(double a, double c, double x) const;

 private:
  double eval_slow(double x) const;
};

enum class Scheme { full_truncation, near_zero_ladder };

const char* scheme_name(Scheme s);
Scheme parse_scheme(std::string_view name);

struct SdeParams {
  double delta = 0.0;
  NoiseSpec noise;
  double z0 = 0.0;
};

struct Path1D {
  double t0 = 0.0;
  double dt = 1.0;
  std::vector<double> values;
  // touched[k] != 0 when the process sat at 0 somewhere in (t_{k-1}, t_k].
  // Empty means "derive from values".
  std::vector<std::uint8_t> touched;

  std::size_t size() const { return values.size(); }
  double time(std::size_t k) const { return t0 + static_cast<double>(k) * dt; }
  double duration() const { return static_cast<double>(values.size() - 1) * dt; }
  bool at_zero(std::size_t k) const { return values[k] == 0.0 || (!touched.empty() && touched[k]); }
};

double step_full_truncation(double z, double delta, const NoiseSpec& noise, double dt, double xi);

struct StepResult {
  double value = 0.0;
  bool touched_zero = false;
};

// One grid step of either scheme. The drift is a callable b(z).
//
// near_zero_ladder: Euler with truncation while sigma(z) sqrt(h) <= z / resolve_k.
// Below that, the state moves on the octave ladder z -> {z/2, 2z} (or
// {0, 2z} near the floor) with the exact mean exit time as time increment
// and the exit probability chosen so the move has mean z + b m. Under the
// floor, with positive drift, the state ramps deterministically.
class Stepper {
 public:
  Stepper(const NoiseSpec& noise, double dt, Scheme scheme, double floor_ratio = 0.01, double resolve_k = 4.0);

  double dt() const { return dt_; }
  Scheme scheme() const { return scheme_; }
  double floor_level() const { return floor_; }
  const NoiseSpec& noise() const { return noise_; }

  template <class Drift>
  StepResult advance(double z, Drift&& drift, RngStream& rng) const;

 private:
  double exit_mean(bool low, double z) const;

  NoiseSpec noise_;
  double dt_;
  Scheme scheme_;
  double floor_ = 0.0;
  double resolve_k2_ = 16.0;
  double k_mid_ = 0.0;
  double k_low_ = 0.0;
  double two_minus_2g_ = 1.5;
};

template <class Drift>
StepResult Stepper::advance(double z, Drift&& drift, RngStream& rng) const {
  if (scheme_ == Scheme::full_truncation || noise_.mode == NoiseMode::degenerate) {
    const double out = step_full_truncation(z, drift(z), noise_, dt_, rng.normal());
    return {out, out == 0.0};
  }
  double r = dt_;
  bool touched = z <= 0.0;
  if (z < 0.0) z = 0.0;
  while (r > 0.0) {
    if (z < floor_) {
      // Below the floor the state follows its mean, z' = b.
      if (z == 0.0) touched = true;
      const double b0 = drift(z);
      if (b0 > 0.0) {
        const double ramp = (floor_ - z) / b0;
        if (ramp >= r) {
          z += b0 * r;
          break;
        }
        z = floor_;
        r -= ramp;
        continue;
      }
      if (z == 0.0) break;
    }
    const double s = noise_(z);
    const double b = drift(z);
    const double h_res = z * z / (resolve_k2_ * s * s);
    if (h_res >= r) {
      z = std::max(0.0, z + b * r + s * std::sqrt(r) * rng.normal());
      if (z == 0.0) touched = true;
      break;
    }
    const bool low = 0.5 * z < floor_;
    const double lo = low ? 0.0 : 0.5 * z;
    const double hi = 2.0 * z;
    const double m = exit_mean(low, z);
    const double p = (z + b * m - lo) / (hi - lo);
    if (m <= r && p <= 1.0) {
      z = rng.uniform() < p ? hi : lo;
      r -= m;
    } else {
      z = std::max(0.0, z + b * h_res + s * std::sqrt(h_res) * rng.normal());
      r -= h_res;
    }
    if (z == 0.0) touched = true;
  }
  return {z, touched};
}

// Constant drift delta.
struct ConstantDrift {
  double delta;
  double operator()(double) const { return delta; }
};

Path1D simulate_path(const SdeParams& params, double horizon, double dt, RngStream& stream,
                     Scheme scheme = Scheme::near_zero_ladder);

std::optional<double> first_hitting_time(const Path1D& path, double level, std::size_t start_index = 0);

double occupation_time(const Path1D& path, double eps, double horizon);

}  // namespace exlab
