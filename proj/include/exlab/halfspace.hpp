#pragma once

#include <optional>
#include <vector>

#include "exlab/lattice.hpp"

namespace exlab {

// Y(i): mass of all sites with first coordinate >= i.
double halfspace_mass(const LatticeState& state, int i);
double halfspace_mass(const Box& box, std::span<const double> values, int i);

// d(i) = <X, L* h(. - i)> + <f(X), h(. - i)> under the restricted kernel.
double drift_term(const LatticeState& state, const JumpKernel& kernel, const DriftSpec& f, int i);

struct HalfspaceSeries {
  int i = 0;
  std::vector<double> times;
  std::vector<double> y;
  std::vector<double> d;
};

HalfspaceSeries halfspace_series(const LatticeTrajectory& traj, const JumpKernel& kernel, const DriftSpec& f, int i);

struct StoppingTimes {
  std::optional<double> T_delta;  // first time d > delta
  std::optional<double> tau1;     // first time y > 1
  std::optional<std::size_t> T_index;
  std::optional<std::size_t> tau1_index;
};

// Crossing times are interpolated between the bracketing grid points; the
// indices are the first grid points strictly past the level.
StoppingTimes stopping_scan(const HalfspaceSeries& series, double delta);

struct CouplingRecord {
  std::vector<double> times;
  std::vector<double> y;
  std::vector<double> delta_path;
  std::vector<double> ybar;
  StoppingTimes stops;
  std::size_t stop_index = 0;  // last grid index covered by the record
  bool stopped = false;        // T_delta or tau1 reached before the series ended

  double max_y_minus_ybar() const;
};

// Delta solves dDelta = (delta - d_t)_+ dt + Delta^gamma dW on an independent
// stream and Ybar = Y + Delta, up to the first of T_delta, tau1 or the series end.
CouplingRecord couple_dominator(const HalfspaceSeries& series, double delta, const NoiseSpec& noise, double dt,
                                const RngStream& stream, Scheme scheme = Scheme::near_zero_ladder);

// Per-path pieces of the coupling statistics.
struct CouplingIncrements {
  std::vector<double> increments;  // Ybar_{k+1} - Ybar_k up to the stop
  double qv = 0.0;                 // sum (increment - delta dt)^2
  double qv_lower = 0.0;           // (1/2) sum Ybar_k^{2 gamma} dt
  double drift_residual = 0.0;     // Ybar_S - Ybar_0 - delta S
};

CouplingIncrements coupling_increments(const CouplingRecord& rec, double delta, double gamma);

struct SupportStats {
  double fraction = 0.0;
  std::vector<double> outside_times;
  // Longest gap between consecutive outside times, 0 with fewer than two.
  double max_outside_gap() const;
};

SupportStats support_stats(const LatticeTrajectory& traj, int radius);

// Share of mass within distance `width` of the box boundary.
double boundary_mass_fraction(const LatticeState& state, int width = 5);
double boundary_mass_fraction(const Box& box, std::span<const double> values, int width = 5);

}  // namespace exlab
