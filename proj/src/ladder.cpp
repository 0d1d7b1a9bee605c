#include "exlab/ladder.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "exlab/parallel.hpp"

namespace exlab {

double LadderConfig::level(int n) const { return std::ldexp(zeta, -n); }

void LadderConfig::validate() const {
  if (!(zeta > 0.0)) throw std::invalid_argument("ladder: zeta must be positive");
  if (depth < 1) throw std::invalid_argument("ladder: depth must be >= 1");
}

EmbeddedWalk embedded_walk(const Path1D& path, const LadderConfig& config) {
  config.validate();
  EmbeddedWalk walk;
  int last = -1;
  auto visit = [&](int n, double t) {
    if (n == last) return;
    walk.s.push_back(n);
    walk.sigma_times.push_back(t);
    last = n;
  };
  const auto& v = path.values;
  for (int n = 0; n <= config.depth; ++n) {
    if (v.front() == config.level(n)) visit(n, path.t0);
  }
  for (std::size_t k = 0; k + 1 < v.size(); ++k) {
    const double a = v[k], b = v[k + 1];
    if (a == b) continue;
    const double t = path.time(k);
    auto at = [&](double lv) { return t + path.dt * (lv - a) / (b - a); };
    if (b > a) {
      for (int n = config.depth; n >= 0; --n) {
        const double lv = config.level(n);
        if (lv > a && lv <= b) visit(n, at(lv));
      }
    } else {
      for (int n = 0; n <= config.depth; ++n) {
        const double lv = config.level(n);
        if (lv < a && lv >= b) visit(n, at(lv));
      }
    }
  }
  return walk;
}

double bridge_cross_probability(double z0, double z1, double level, double s, double dt) {
  const double d0 = z0 - level, d1 = z1 - level;
  if (d0 * d1 <= 0.0) return 1.0;
  if (!(s > 0.0)) return 0.0;
  const double x = 2.0 * d0 * d1 / (s * s * dt);
  return x > 700.0 ? 0.0 : std::exp(-x);
}

ExitOutcome run_to_exit(const Stepper& stepper, double delta, double z0, double lo, double hi,
                        std::size_t max_steps, RngStream& rng, bool bridge) {
  if (z0 >= hi) return {ExitKind::up, 0.0};
  if (lo > 0.0 ? z0 <= lo : z0 == 0.0) return {ExitKind::down, 0.0};
  const double dt = stepper.dt();
  const ConstantDrift drift{delta};
  double z = z0;
  double t = 0.0;
  for (std::size_t step = 0; step < max_steps; ++step) {
    const auto res = stepper.advance(z, drift, rng);
    const double z1 = res.value;
    if (lo == 0.0 ? res.touched_zero : z1 <= lo) {
      return {ExitKind::down, lo == 0.0 ? t + dt : t + dt * (z - lo) / (z - z1)};
    }
    if (z1 >= hi) return {ExitKind::up, t + dt * (hi - z) / (z1 - z)};
    if (bridge) {
      const double s = stepper.noise()(z);
      const double pu = bridge_cross_probability(z, z1, hi, s, dt);
      if (pu > 0.0 && rng.uniform() < pu) return {ExitKind::up, t + 0.5 * dt};
      if (lo > 0.0) {
        const double pd = bridge_cross_probability(z, z1, lo, s, dt);
        if (pd > 0.0 && rng.uniform() < pd) return {ExitKind::down, t + 0.5 * dt};
      }
    }
    z = z1;
    t += dt;
  }
  return {ExitKind::censored, t};
}

namespace {

std::size_t step_cap(double scale, double dt) {
  return static_cast<std::size_t>(std::ceil(1e4 * scale / dt));
}

void warn_censoring(std::size_t censored, std::size_t replicas, std::vector<std::string>& warnings) {
  if (static_cast<double>(censored) > 1e-3 * static_cast<double>(replicas)) {
    warnings.push_back(std::to_string(censored) + " of " + std::to_string(replicas) +
                       " replicas hit the step cap");
  }
}

}  // namespace

IntervalExitStats interval_exit_stats(const SdeParams& params, const LadderConfig& config, int n,
                                      std::size_t replicas, double dt, std::uint64_t seed,
                                      const RunOptions& opt) {
  config.validate();
  if (n < 1 || n > config.depth - 1) throw std::invalid_argument("interval_exit_stats: need 1 <= n <= depth-1");
  if (replicas < 100) throw std::invalid_argument("interval_exit_stats: need >= 100 replicas");
  IntervalExitStats st;
  st.n = n;
  st.a_n = config.level(n);
  st.time_scale = std::pow(st.a_n, 2.0 - 2.0 * params.noise.gamma);
  const double lo = config.level(n + 1), hi = config.level(n - 1);
  const Stepper stepper(params.noise, dt, opt.scheme);
  const auto cap = step_cap(st.time_scale, dt);
  const auto out = parallel_map<ExitOutcome>(replicas, opt.threads, [&](std::size_t r) {
    auto rng = split_stream(seed, {"interval-exit", n, r});
    return run_to_exit(stepper, params.delta, st.a_n, lo, hi, cap, rng, opt.bridge);
  });
  st.tail.resize(10);
  for (const auto& o : out) {
    if (o.kind == ExitKind::censored) {
      ++st.censored;
    } else {
      st.up.trials++;
      if (o.kind == ExitKind::up) st.up.successes++;
      st.exit_time.add(o.time);
    }
    for (int m = 1; m <= 10; ++m) {
      auto& p = st.tail[m - 1];
      p.trials++;
      if (o.kind == ExitKind::censored || o.time > m * st.time_scale) p.successes++;
    }
  }
  warn_censoring(st.censored, replicas, st.warnings);
  st.outcomes = out;
  return st;
}

HittingStats two_zeta_hitting(const SdeParams& params, double zeta, std::size_t replicas, double dt,
                              std::uint64_t seed, const RunOptions& opt) {
  if (!(zeta > 0.0)) throw std::invalid_argument("two_zeta_hitting: zeta must be positive");
  if (replicas < 1000) throw std::invalid_argument("two_zeta_hitting: need >= 1000 replicas");
  const Stepper stepper(params.noise, dt, opt.scheme);
  const auto cap = step_cap(std::pow(zeta, 2.0 - 2.0 * params.noise.gamma), dt);
  const auto out = parallel_map<ExitOutcome>(replicas, opt.threads, [&](std::size_t r) {
    auto rng = split_stream(seed, {"two-zeta", r});
    return run_to_exit(stepper, params.delta, zeta, 0.0, 2.0 * zeta, cap, rng, opt.bridge);
  });
  HittingStats st;
  for (const auto& o : out) {
    if (o.kind == ExitKind::censored) {
      ++st.censored;
      continue;
    }
    st.up.trials++;
    if (o.kind == ExitKind::up) st.up.successes++;
    st.exit_time.add(o.time);
  }
  warn_censoring(st.censored, replicas, st.warnings);
  st.outcomes = out;
  return st;
}

Proportion ExcursionStats::height_at_least(int k) const {
  Proportion p;
  p.trials = height.size();
  for (int h : height) p.successes += h >= k;
  return p;
}

std::size_t ExcursionStats::censored_count() const {
  return static_cast<std::size_t>(std::count(censored.begin(), censored.end(), 1));
}

ExcursionStats excursion_heights(const SdeParams& params, const LadderConfig& config, std::size_t replicas,
                                 double dt, std::uint64_t seed, const RunOptions& opt) {
  config.validate();
  if (config.depth < 2) throw std::invalid_argument("excursion_heights: need depth >= 2");
  if (replicas < 1000) throw std::invalid_argument("excursion_heights: need >= 1000 replicas");
  const double zeta = config.zeta;
  const Stepper stepper(params.noise, dt, opt.scheme);
  const double top = std::ldexp(zeta, config.depth - 1);
  const auto cap = step_cap(std::pow(top, 2.0 - 2.0 * params.noise.gamma), dt);
  struct Rec {
    int h = 1;
    double duration = 0.0;
    bool censored = false;
  };
  const auto out = parallel_map<Rec>(replicas, opt.threads, [&](std::size_t r) {
    auto rng = split_stream(seed, {"excursion", r});
    const ConstantDrift drift{params.delta};
    Rec rec;
    double z = zeta, t = 0.0, next = 2.0 * zeta;
    for (std::size_t step = 0; step < cap; ++step) {
      const auto res = stepper.advance(z, drift, rng);
      const double z1 = res.value;
      t += dt;
      if (res.touched_zero) {
        rec.duration = t;
        return rec;
      }
      bool crossed = z1 >= next;
      if (!crossed && opt.bridge) {
        const double p = bridge_cross_probability(z, z1, next, stepper.noise()(z), dt);
        crossed = p > 0.0 && rng.uniform() < p;
      }
      while (crossed) {
        ++rec.h;
        if (rec.h >= config.depth) {
          rec.censored = true;
          rec.duration = t;
          return rec;
        }
        next *= 2.0;
        crossed = z1 >= next;
      }
      z = z1;
    }
    rec.censored = true;
    rec.duration = t;
    return rec;
  });
  ExcursionStats st;
  st.depth = config.depth;
  st.zeta = zeta;
  for (const auto& r : out) {
    st.height.push_back(r.h);
    st.duration.push_back(r.duration);
    st.censored.push_back(r.censored ? 1 : 0);
  }
  return st;
}

UpLegStats up_leg_times(double delta, const NoiseSpec& noise, double zeta, std::size_t replicas, double dt,
                        std::uint64_t seed, const RunOptions& opt) {
  if (!(delta > 0.0) || !(zeta > 0.0)) throw std::invalid_argument("up_leg_times: need delta, zeta > 0");
  const Stepper stepper(noise, dt, opt.scheme);
  const double scale = std::max(std::pow(zeta, 2.0 - 2.0 * noise.gamma), 0.01 * zeta / delta);
  const auto cap = step_cap(scale, dt);
  const auto out = parallel_map<ExitOutcome>(replicas, opt.threads, [&](std::size_t r) {
    auto rng = split_stream(seed, {"up-leg", r});
    const ConstantDrift drift{delta};
    double z = 0.0, t = 0.0;
    for (std::size_t step = 0; step < cap; ++step) {
      const double z1 = stepper.advance(z, drift, rng).value;
      if (z1 >= zeta) return ExitOutcome{ExitKind::up, t + dt * (zeta - z) / (z1 - z)};
      if (opt.bridge) {
        const double p = bridge_cross_probability(z, z1, zeta, noise(z), dt);
        if (p > 0.0 && rng.uniform() < p) return ExitOutcome{ExitKind::up, t + 0.5 * dt};
      }
      z = z1;
      t += dt;
    }
    return ExitOutcome{ExitKind::censored, t};
  });
  UpLegStats st;
  for (const auto& o : out) {
    if (o.kind == ExitKind::censored) ++st.censored;
    else st.times.push_back(o.time);
  }
  st.outcomes = out;
  return st;
}

std::size_t DowncrossRecord::count_at(double t) const {
  return static_cast<std::size_t>(std::upper_bound(gamma.begin(), gamma.end(), t) - gamma.begin());
}

DowncrossCounter::DowncrossCounter(double zeta, bool bridge, bool keep_times)
    : zeta_(zeta), bridge_(bridge), keep_(keep_times) {
  if (!(zeta > 0.0)) throw std::invalid_argument("downcrossings: zeta must be positive");
}

void DowncrossCounter::push(double t, double dt, double z0, double z1, bool touched_zero, double sigma0,
                            RngStream& rng) {
  if (!seeking_zero_) {
    double when = 0.0;
    bool hit = false;
    if (z0 >= zeta_) {
      hit = true;
      when = t;
    } else if (z1 >= zeta_) {
      hit = true;
      when = t + dt * (zeta_ - z0) / (z1 - z0);
    } else if (bridge_) {
      const double p = bridge_cross_probability(z0, z1, zeta_, sigma0, dt);
      if (p > 0.0 && rng.uniform() < p) {
        hit = true;
        when = t + 0.5 * dt;
      }
    }
    if (!hit) return;
    seeking_zero_ = true;
    if (keep_) record_.tau.push_back(when);
    if (!(touched_zero && z1 < zeta_)) return;
  }
  if (touched_zero || z1 == 0.0) {
    seeking_zero_ = false;
    ++count_;
    if (keep_) record_.gamma.push_back(t + dt);
  }
}

DowncrossRecord downcrossings(const Path1D& path, double zeta, double horizon) {
  if (horizon > path.duration() + 1e-9 * path.dt) throw std::invalid_argument("downcrossings: horizon beyond path");
  DowncrossCounter counter(zeta, false, true);
  RngStream unused;
  const double t_end = path.t0 + horizon + 1e-9 * path.dt;
  for (std::size_t k = 0; k + 1 < path.size() && path.time(k + 1) <= t_end; ++k) {
    counter.push(path.time(k), path.dt, path.values[k], path.values[k + 1], path.at_zero(k + 1), 0.0, unused);
  }
  DowncrossRecord rec = counter.record();
  rec.t0 = path.t0;
  return rec;
}

UpDown updown_decomposition(const DowncrossRecord& record, std::size_t n) {
  UpDown out;
  out.used = std::min(n, record.gamma.size());
  out.complete = out.used == n;
  double prev = record.t0;
  for (std::size_t i = 0; i < out.used; ++i) {
    out.t_up += record.tau[i] - prev;
    out.t_down += record.gamma[i] - record.tau[i];
    prev = record.gamma[i];
  }
  return out;
}

RunningStats ZeroSetEstimates::downcross_stats(std::size_t j) const {
  RunningStats s;
  for (const auto& row : downcross) s.add(row.at(j));
  return s;
}

RunningStats ZeroSetEstimates::occupation_stats() const {
  RunningStats s;
  for (double x : occupation) s.add(x);
  return s;
}

void ZeroSetEstimates::add(const Path1D& path) {
  std::vector<double> row;
  for (double z : zetas) {
    const auto rec = downcrossings(path, z, horizon);
    row.push_back(z * static_cast<double>(rec.count_at(path.t0 + horizon)) / delta);
  }
  downcross.push_back(std::move(row));
  occupation.push_back(occupation_time(path, eps, horizon));
}

ZeroSetEstimates zero_set_measure(const std::vector<Path1D>& paths, const std::vector<double>& zetas,
                                  double delta, double horizon, double eps) {
  if (zetas.size() < 2) throw std::invalid_argument("zero_set_measure: need at least two zeta values");
  if (!(delta > 0.0)) throw std::invalid_argument("zero_set_measure: delta must be positive");
  ZeroSetEstimates est;
  est.zetas = zetas;
  est.delta = delta;
  est.horizon = horizon;
  est.eps = eps;
  for (const auto& p : paths) est.add(p);
  return est;
}

double longest_zero_run(const Path1D& path) {
  std::size_t best = 0, run = 0;
  for (double v : path.values) {
    run = v == 0.0 ? run + 1 : 0;
    best = std::max(best, run);
  }
  return best > 0 ? static_cast<double>(best - 1) * path.dt : 0.0;
}

}  // namespace exlab
