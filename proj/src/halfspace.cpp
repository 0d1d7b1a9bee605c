#include "exlab/halfspace.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace exlab {

namespace {

void check_cut(const Box& box, int i) {
  if (i < -box.radius() || i > box.radius()) throw std::out_of_range("halfspace: cut outside the box");
}

// L* h(. - i) as a field on the box.
std::vector<double> adjoint_heaviside(const JumpKernel& kernel, const Box& box, int i) {
  std::vector<double> h(box.size(), 0.0);
  for (std::size_t j = box.halfspace_begin(i); j < box.size(); ++j) h[j] = 1.0;
  return apply_generator(kernel.adjoint(), box, h);
}

double drift_with(const std::vector<double>& lh, const Box& box, std::span<const double> x, const DriftSpec& f,
                  int i) {
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) s += x[j] * lh[j];
  if (f.mode != DriftMode::zero)
    for (std::size_t j = box.halfspace_begin(i); j < x.size(); ++j) s += f(x[j]);
  return s;
}

std::optional<double> crossing(const std::vector<double>& t, const std::vector<double>& v, std::size_t k,
                               double level) {
  if (k == 0) return t[0];
  const double a = v[k - 1], b = v[k];
  return t[k - 1] + (level - a) / (b - a) * (t[k] - t[k - 1]);
}

}  // namespace

double halfspace_mass(const Box& box, std::span<const double> values, int i) {
  check_cut(box, i);
  double s = 0.0;
  for (std::size_t j = box.halfspace_begin(i); j < values.size(); ++j) s += values[j];
  return s;
}

double halfspace_mass(const LatticeState& state, int i) { return halfspace_mass(state.box(), state.values, i); }

double drift_term(const LatticeState& state, const JumpKernel& kernel, const DriftSpec& f, int i) {
  const Box box = state.box();
  check_cut(box, i);
  return drift_with(adjoint_heaviside(kernel, box, i), box, state.values, f, i);
}

HalfspaceSeries halfspace_series(const LatticeTrajectory& traj, const JumpKernel& kernel, const DriftSpec& f, int i) {
  const Box box(traj.dim, traj.box_radius);
  check_cut(box, i);
  const auto lh = adjoint_heaviside(kernel, box, i);
  HalfspaceSeries s;
  s.i = i;
  s.times = traj.times;
  for (const auto& fr : traj.frames) {
    s.y.push_back(halfspace_mass(box, fr, i));
    s.d.push_back(drift_with(lh, box, fr, f, i));
  }
  return s;
}

StoppingTimes stopping_scan(const HalfspaceSeries& series, double delta) {
  if (series.times.empty() || series.y.size() != series.times.size() || series.d.size() != series.times.size())
    throw std::invalid_argument("stopping_scan: empty or inconsistent series");
  StoppingTimes st;
  for (std::size_t k = 0; k < series.times.size(); ++k) {
    if (!st.T_index && series.d[k] > delta) {
      st.T_index = k;
      st.T_delta = crossing(series.times, series.d, k, delta);
    }
    if (!st.tau1_index && series.y[k] > 1.0) {
      st.tau1_index = k;
      st.tau1 = crossing(series.times, series.y, k, 1.0);
    }
    if (st.T_index && st.tau1_index) break;
  }
  return st;
}

double CouplingRecord::max_y_minus_ybar() const {
  double m = -INFINITY;
  for (std::size_t k = 0; k < y.size(); ++k) m = std::max(m, y[k] - ybar[k]);
  return m;
}

CouplingRecord couple_dominator(const HalfspaceSeries& series, double delta, const NoiseSpec& noise, double dt,
                                const RngStream& stream, Scheme scheme) {
  if (!(delta > 0.0)) throw std::invalid_argument("couple_dominator: delta must be positive");
  const auto n = series.times.size();
  for (std::size_t k = 1; k < n; ++k)
    if (std::abs(series.times[k] - series.times[k - 1] - dt) > 1e-6 * dt)
      throw std::invalid_argument("couple_dominator: series is not sampled with step dt");
  CouplingRecord rec;
  rec.stops = stopping_scan(series, delta);
  std::size_t last = n - 1;
  if (rec.stops.T_index) last = std::min(last, *rec.stops.T_index);
  if (rec.stops.tau1_index) last = std::min(last, *rec.stops.tau1_index);
  rec.stopped = rec.stops.T_index || rec.stops.tau1_index;
  rec.stop_index = last;

  const Stepper stepper(noise, dt, scheme);
  RngStream rng = stream;
  double z = 0.0;
  for (std::size_t k = 0; k <= last; ++k) {
    rec.times.push_back(series.times[k]);
    rec.y.push_back(series.y[k]);
    rec.delta_path.push_back(z);
    rec.ybar.push_back(series.y[k] + z);
    if (k == last) break;
    const double b = std::max(0.0, delta - series.d[k]);
    z = stepper.advance(z, [b](double) { return b; }, rng).value;
  }
  return rec;
}

CouplingIncrements coupling_increments(const CouplingRecord& rec, double delta, double gamma) {
  CouplingIncrements c;
  const std::size_t n = rec.ybar.size();
  if (n == 0) return c;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double dt = rec.times[k + 1] - rec.times[k];
    const double inc = rec.ybar[k + 1] - rec.ybar[k];
    c.increments.push_back(inc);
    c.qv += (inc - delta * dt) * (inc - delta * dt);
    c.qv_lower += 0.5 * std::pow(rec.ybar[k], 2.0 * gamma) * dt;
  }
  c.drift_residual = rec.ybar[n - 1] - rec.ybar[0] - delta * (rec.times[n - 1] - rec.times[0]);
  return c;
}

double SupportStats::max_outside_gap() const {
  double g = 0.0;
  for (std::size_t k = 1; k < outside_times.size(); ++k) g = std::max(g, outside_times[k] - outside_times[k - 1]);
  return g;
}

SupportStats support_stats(const LatticeTrajectory& traj, int radius) {
  if (radius < 0 || radius >= traj.box_radius) throw std::invalid_argument("support_stats: need 0 <= radius < box radius");
  if (traj.frames.empty()) throw std::invalid_argument("support_stats: empty trajectory");
  const Box box(traj.dim, traj.box_radius);
  std::vector<std::size_t> outer;
  for (std::size_t j = 0; j < box.size(); ++j)
    if (box.linf(j) > radius) outer.push_back(j);
  SupportStats s;
  std::size_t inside = 0;
  for (std::size_t k = 0; k < traj.frames.size(); ++k) {
    const auto& fr = traj.frames[k];
    const bool out = std::any_of(outer.begin(), outer.end(), [&](std::size_t j) { return fr[j] > 0.0; });
    if (out) s.outside_times.push_back(traj.times[k]);
    else ++inside;
  }
  s.fraction = static_cast<double>(inside) / static_cast<double>(traj.frames.size());
  return s;
}

double boundary_mass_fraction(const Box& box, std::span<const double> values, int width) {
  double total = 0.0, edge = 0.0;
  for (std::size_t j = 0; j < values.size(); ++j) {
    total += values[j];
    if (box.linf(j) >= box.radius() - width) edge += values[j];
  }
  return total > 0.0 ? edge / total : 0.0;
}

double boundary_mass_fraction(const LatticeState& state, int width) {
  return boundary_mass_fraction(state.box(), state.values, width);
}

}  // namespace exlab
