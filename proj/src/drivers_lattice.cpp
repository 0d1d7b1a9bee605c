#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "drivers.hpp"
#include "exlab/halfspace.hpp"
#include "exlab/stats.hpp"

namespace exlab::detail {

namespace {

#define EXLAB_LATTICE_KEYS \
  "dim", "box_radius", "rates", "symmetric", "kernel", "x0", "gamma", "noise", "drift", "transport", "scheme"

struct LatticeModel {
  LatticeSetup setup;
  DriftSpec f;
  LatticeOptions opt;
  Json raw;

  NoiseSpec noise(double gamma) const {
    Json m = raw;
    m["gamma"] = gamma;
    return noise_from_json(m);
  }
  SystemStepper stepper(const NoiseSpec& noise, double dt) const {
    return SystemStepper(setup.kernel, f, noise, dt, setup.x0.dim, setup.x0.box_radius, opt);
  }
};

LatticeModel lattice_model(const Json& m) {
  LatticeModel lm;
  lm.raw = m;
  lm.setup = lattice_setup_from_json(m);
  lm.f = drift_from_json(m);
  lm.opt.noise_scheme = scheme_from_json(m);
  lm.opt.transport = parse_transport(m.value("transport", std::string("exponential")));
  noise_from_json(m);
  return lm;
}

// Largest first coordinate carrying initial mass.
int support_edge(const LatticeState& x0) {
  const Box box = x0.box();
  int edge = -x0.box_radius - 1;
  for (std::size_t k = 0; k < x0.values.size(); ++k)
    if (x0.values[k] > 0.0) edge = std::max(edge, box.first_coord(k));
  return edge;
}

std::string radius_column(double R) { return "fraction_inside_r" + format_number(R); }

std::vector<int> int_list(const Json& m, const char* key, std::vector<int> fallback) {
  if (!m.contains(key)) return fallback;
  auto v = m.at(key).get<std::vector<int>>();
  if (v.empty()) throw std::invalid_argument(std::string("model: '") + key + "' must be non-empty");
  return v;
}

void check_radii(const std::vector<int>& radii, int box_radius) {
  for (int R : radii)
    if (R < 0 || R >= box_radius) throw std::invalid_argument("model: radii must lie in [0, box_radius)");
}

std::size_t default_record_every(const ExperimentConfig& c, std::size_t frames) {
  const auto steps = static_cast<std::size_t>(std::ceil(c.horizon / c.dt - 1e-9));
  return std::max<std::size_t>(1, steps / frames);
}

// ---------------------------------------------------------------- support

void run_support(const ExperimentConfig& c, const LatticeModel& lm, unsigned threads, ResultSet& r) {
  const auto& m = c.model;
  const auto gammas = number_list(m, "gammas", {m.value("gamma", 0.25)});
  const auto radii = int_list(m, "radii", {20});
  const int width = m.value("boundary_width", 5);
  const double tol = m.value("boundary_tol", 1e-3);
  const std::size_t every = m.value("record_every", std::size_t{1});
  const std::size_t G = gammas.size(), n = c.replicas;

  std::vector<SystemStepper> steppers;
  for (double g : gammas) steppers.push_back(lm.stepper(lm.noise(g), c.dt));

  struct Rec {
    std::vector<double> frac;
    double boundary = 0.0;
    bool extinct = false;
  };
  std::vector<Rec> recs(G * n);
  std::vector<std::uint8_t> ok(G * n, 0);
  const Box box = lm.setup.x0.box();
  auto failures = parallel_for(G * n, threads, [&](std::size_t k) {
    const std::size_t g = k / n, rep = k % n;
    const auto traj =
        simulate_lattice(lm.setup.x0, steppers[g], c.horizon, every, split_stream(c.seed, {rep, "lattice"}));
    Rec rec;
    for (int R : radii) rec.frac.push_back(support_stats(traj, R).fraction);
    for (const auto& frame : traj.frames) rec.boundary = std::max(rec.boundary, boundary_mass_fraction(box, frame, width));
    const auto& last = traj.frames.back();
    rec.extinct = std::all_of(last.begin(), last.end(), [](double v) { return v == 0.0; });
    recs[k] = std::move(rec);
    ok[k] = 1;
  });
  for (auto& f : failures) {
    f.message = "gamma=" + format_number(gammas[f.replica / n]) + ": " + f.message;
    f.replica %= n;
  }
  note_failures(r, failures);

  r.records.columns = {"replica", "gamma"};
  for (int R : radii) r.records.columns.push_back(radius_column(R));
  r.records.columns.insert(r.records.columns.end(), {"boundary_mass_max", "extinct"});
  double boundary = 0.0;
  for (std::size_t k = 0; k < G * n; ++k) {
    if (!ok[k]) continue;
    std::vector<Cell> row{static_cast<double>(k % n), gammas[k / n]};
    for (double f : recs[k].frac) row.emplace_back(f);
    row.emplace_back(recs[k].boundary);
    row.emplace_back(recs[k].extinct ? 1.0 : 0.0);
    r.records.add_row(std::move(row));
    boundary = std::max(boundary, recs[k].boundary);
  }
  r.csv_columns = r.records.columns;
  r.csv_from_summary = false;

  for (std::size_t g = 0; g < G; ++g) {
    std::size_t ext = 0, cnt = 0;
    for (std::size_t rep = 0; rep < n; ++rep)
      if (ok[g * n + rep]) {
        ++cnt;
        ext += recs[g * n + rep].extinct;
      }
    add_aggregate(r, proportion_aggregate("extinct_g" + format_number(gammas[g]), ext, cnt));
    for (std::size_t j = 0; j < radii.size(); ++j) {
      std::vector<double> v;
      for (std::size_t rep = 0; rep < n; ++rep)
        if (ok[g * n + rep]) v.push_back(recs[g * n + rep].frac[j]);
      add_aggregate(r, mean_aggregate("fraction_g" + format_number(gammas[g]) + "_r" + format_number(radii[j]), v));
    }
  }
  envelope(r, "boundary_mass", width, boundary, std::nullopt, std::nullopt, tol);

  if (m.contains("contrast")) {
    if (G != 2) throw std::invalid_argument("support: contrast needs exactly two gammas");
    const auto& cj = m.at("contrast");
    const int R = cj.value("radius", radii.front());
    const auto it = std::find(radii.begin(), radii.end(), R);
    if (it == radii.end()) throw std::invalid_argument("support: contrast radius not among radii");
    const auto j = static_cast<std::size_t>(it - radii.begin());
    // Paired by replica: both gammas use the same streams.
    std::vector<double> diff;
    for (std::size_t rep = 0; rep < n; ++rep)
      if (ok[rep] && ok[n + rep]) diff.push_back(recs[rep].frac[j] - recs[n + rep].frac[j]);
    const auto a = mean_aggregate("contrast_r" + format_number(R), diff);
    add_aggregate(r, a);
    envelope(r, "support_contrast", R, a.mean, a.se, cj.value("min", 0.2), std::nullopt);
  }
}

// ---------------------------------------------------------------- moments

void run_moments(const ExperimentConfig& c, const LatticeModel& lm, unsigned threads, ResultSet& r) {
  const auto& m = c.model;
  const auto stepper = lm.stepper(lm.noise(m.value("gamma", 0.25)), c.dt);
  const std::size_t every = m.value("record_every", default_record_every(c, 10));
  const double z = m.value("z", 3.0);
  const std::size_t batch = 256;

  MomentAccumulator acc;
  std::vector<ReplicaFailure> failures;
  std::vector<std::vector<double>> mass;  // per kept replica, per recorded time
  std::vector<std::size_t> kept;
  std::vector<double> times;
  for (std::size_t b0 = 0; b0 < c.replicas; b0 += batch) {
    const std::size_t nb = std::min(batch, c.replicas - b0);
    std::vector<LatticeTrajectory> tr(nb);
    std::vector<std::uint8_t> ok(nb, 0);
    auto f = parallel_for(nb, threads, [&](std::size_t k) {
      tr[k] = simulate_lattice(lm.setup.x0, stepper, c.horizon, every, split_stream(c.seed, {b0 + k, "lattice"}));
      ok[k] = 1;
    });
    for (auto& e : f) failures.push_back({b0 + e.replica, std::move(e.message)});
    for (std::size_t k = 0; k < nb; ++k) {
      if (!ok[k]) continue;
      acc.add(tr[k]);
      times = tr[k].times;
      std::vector<double> row;
      for (const auto& frame : tr[k].frames) {
        double s = 0.0;
        for (double v : frame) s += v;
        row.push_back(s);
      }
      mass.push_back(std::move(row));
      kept.push_back(b0 + k);
    }
  }
  note_failures(r, failures);
  if (kept.empty()) return;

  r.records.columns = {"replica"};
  for (double t : times) r.records.columns.push_back("mass_t" + format_number(t));
  for (std::size_t q = 0; q < kept.size(); ++q) {
    std::vector<Cell> row{static_cast<double>(kept[q])};
    for (double v : mass[q]) row.emplace_back(v);
    r.records.add_row(std::move(row));
  }

  const auto rep = first_moment_check(acc, lm.setup.kernel, lm.f, lm.setup.x0, z);
  // Mass is a martingale only without drift.
  if (rep.equality_checked) {
    const double m0 = lm.setup.x0.total_mass();
    const auto& total = acc.total_mass();
    for (std::size_t k = 1; k < times.size(); ++k) {
      const double se = total[k].se();
      const double gap = std::fabs(total[k].mean() - m0);
      r.predicates.push_back(
          {"total_mass[" + format_number(times[k]) + "]", gap, z * se + 1e-12, gap <= z * se + 1e-12});
    }
  }
  const Box box = lm.setup.x0.box();
  r.summary.columns = {"t", "site", "x", "mean", "se", "heat", "bound", "equality_ok", "bound_ok"};
  std::size_t eq_bad = 0, eq_bad_empty = 0, bound_bad = 0;
  for (const auto& row : rep.rows) {
    r.summary.add_row({row.t, static_cast<double>(row.site), static_cast<double>(box.first_coord(row.site)), row.mean,
                       row.se, row.heat, row.bound, row.equality_ok ? 1.0 : 0.0, row.bound_ok ? 1.0 : 0.0});
    if (!row.equality_ok) {
      ++eq_bad;
      if (row.se == 0.0) ++eq_bad_empty;
    }
    bound_bad += !row.bound_ok;
  }
  r.csv_from_summary = true;
  r.csv_columns = r.summary.columns;
  if (rep.equality_checked) {
    r.predicates.push_back({"first_moment_equality", static_cast<double>(eq_bad), 0.0, eq_bad == 0});
    if (eq_bad > 0)
      r.warnings.push_back(std::to_string(eq_bad) + " site/time equality misses, " + std::to_string(eq_bad_empty) +
                           " of them at sites no replica reached");
  }
  r.predicates.push_back({"first_moment_bound", static_cast<double>(bound_bad), 0.0, bound_bad == 0});
  add_aggregate(r, Aggregate{"lipschitz_L", kept.size(), rep.lipschitz_L, 0.0, 0.0, rep.lipschitz_L, rep.lipschitz_L});
}

}  // namespace

void check_lattice(const ExperimentConfig& c) {
  const auto& m = c.model;
  check_keys(m, {EXLAB_LATTICE_KEYS, "experiment", "gammas", "radii", "boundary_width", "boundary_tol", "contrast",
                 "record_every", "z"});
  const auto e = experiment_of(m, "support", {"support", "moments"});
  const auto lm = lattice_model(m);
  for (double g : number_list(m, "gammas", {m.value("gamma", 0.25)})) lm.noise(g);
  if (e == "support") check_radii(int_list(m, "radii", {20}), lm.setup.x0.box_radius);
  if (m.contains("record_every") && m.at("record_every").get<long long>() < 1)
    throw std::invalid_argument("model: record_every must be >= 1");
}

ResultSet run_lattice(const ExperimentConfig& c, unsigned threads) {
  check_lattice(c);
  const auto lm = lattice_model(c.model);
  ResultSet r;
  init_summary(r);
  if (experiment_of(c.model, "support", {"support", "moments"}) == "support") run_support(c, lm, threads, r);
  else run_moments(c, lm, threads, r);
  return r;
}

// ---------------------------------------------------------------- coupling

void check_coupling(const ExperimentConfig& c) {
  const auto& m = c.model;
  check_keys(m, {EXLAB_LATTICE_KEYS, "delta", "cut", "scan_cuts", "radii"});
  const auto lm = lattice_model(m);
  positive(m, "delta", 0.05);
  check_radii(int_list(m, "radii", {}), lm.setup.x0.box_radius);
  if (support_edge(lm.setup.x0) < -lm.setup.x0.box_radius) throw std::invalid_argument("coupling: x0 has no mass");
}

ResultSet run_coupling(const ExperimentConfig& c, unsigned threads) {
  check_coupling(c);
  const auto& m = c.model;
  const auto lm = lattice_model(m);
  const double gamma = m.value("gamma", 0.25);
  const auto noise = lm.noise(gamma);
  const auto stepper = lm.stepper(noise, c.dt);
  const double delta = positive(m, "delta", 0.05);
  const int edge = support_edge(lm.setup.x0);
  const int cut = m.value("cut", edge + 10);
  std::vector<int> scan;
  for (int j = edge + 1; j <= cut; ++j) scan.push_back(j);
  scan = int_list(m, "scan_cuts", scan);
  const auto radii = int_list(m, "radii", {});

  struct Rec {
    StoppingTimes stops;
    double max_gap = 0.0, stop_time = 0.0, residual = 0.0, qv = 0.0, qv_lower = 0.0;
    std::vector<std::uint8_t> stopped;
    std::vector<double> frac;
  };
  std::vector<Rec> recs(c.replicas);
  std::vector<std::uint8_t> ok(c.replicas, 0);
  const auto failures = parallel_for(c.replicas, threads, [&](std::size_t rep) {
    const auto traj = simulate_lattice(lm.setup.x0, stepper, c.horizon, 1, split_stream(c.seed, {rep, "lattice"}));
    const auto series = halfspace_series(traj, lm.setup.kernel, lm.f, cut);
    const auto cr = couple_dominator(series, delta, noise, c.dt, split_stream(c.seed, {rep, "coupling"}),
                                     lm.opt.noise_scheme);
    const auto inc = coupling_increments(cr, delta, gamma);
    Rec rec;
    rec.stops = cr.stops;
    rec.max_gap = cr.max_y_minus_ybar();
    rec.stop_time = cr.times[cr.stop_index] - cr.times.front();
    rec.residual = inc.drift_residual;
    rec.qv = inc.qv;
    rec.qv_lower = inc.qv_lower;
    for (int j : scan) {
      const auto s = stopping_scan(halfspace_series(traj, lm.setup.kernel, lm.f, j), delta);
      rec.stopped.push_back(s.T_index || s.tau1_index);
    }
    for (int R : radii) rec.frac.push_back(support_stats(traj, R).fraction);
    recs[rep] = std::move(rec);
    ok[rep] = 1;
  });

  ResultSet r;
  init_summary(r);
  note_failures(r, failures);
  r.records.columns = {"replica", "i", "T_delta", "tau1", "horizon", "max_y_minus_ybar"};
  for (int R : radii) r.records.columns.push_back(radius_column(R));
  r.csv_columns = r.records.columns;
  r.csv_from_summary = false;
  r.records.columns.insert(r.records.columns.end(), {"stop_time", "drift_residual", "qv", "qv_lower"});
  for (int j : scan) r.records.columns.push_back("stopped_i" + std::to_string(j));

  double max_gap = -INFINITY;
  std::vector<double> residual, qv_gap;
  std::vector<Proportion> stop_p(scan.size());
  for (std::size_t rep = 0; rep < c.replicas; ++rep) {
    if (!ok[rep]) continue;
    const auto& x = recs[rep];
    std::vector<Cell> row{static_cast<double>(rep), static_cast<double>(cut), opt_cell(x.stops.T_delta),
                          opt_cell(x.stops.tau1), c.horizon, x.max_gap};
    for (double f : x.frac) row.emplace_back(f);
    row.insert(row.end(), {x.stop_time, x.residual, x.qv, x.qv_lower});
    for (std::size_t j = 0; j < scan.size(); ++j) {
      row.emplace_back(static_cast<double>(x.stopped[j]));
      stop_p[j].trials++;
      stop_p[j].successes += x.stopped[j];
    }
    r.records.add_row(std::move(row));
    max_gap = std::max(max_gap, x.max_gap);
    residual.push_back(x.residual);
    qv_gap.push_back(x.qv - x.qv_lower);
  }
  if (residual.empty()) return r;

  envelope(r, "domination", cut, max_gap, std::nullopt, std::nullopt, 0.0);
  const auto a = mean_aggregate("drift_residual", residual);
  add_aggregate(r, a);
  envelope(r, "drift_residual", cut, a.mean, a.se, -3.0 * a.se, 3.0 * a.se);
  const auto q = mean_aggregate("qv_gap", qv_gap);
  add_aggregate(r, q);
  envelope(r, "qv_gap", cut, q.mean, q.se, -3.0 * q.se, std::nullopt);

  // P(T_delta ^ tau1 <= horizon) along the cuts: no significant increase
  // between neighbours, and a significant drop from the first to the last.
  for (std::size_t j = 0; j < scan.size(); ++j) {
    add_aggregate(r, proportion_aggregate("stop_prob_i" + std::to_string(scan[j]), stop_p[j].successes, stop_p[j].trials));
    r.summary.add_row({std::string("stop_probability"), static_cast<double>(scan[j]), stop_p[j].estimate(),
                       stop_p[j].se(), Cell{}, Cell{}, Cell{}});
  }
  const auto sd2 = [&](std::size_t a_, std::size_t b_) {
    return 3.0 * std::sqrt(stop_p[a_].se() * stop_p[a_].se() + stop_p[b_].se() * stop_p[b_].se());
  };
  if (scan.size() >= 2) {
    double worst = -INFINITY;
    for (std::size_t j = 0; j + 1 < scan.size(); ++j)
      worst = std::max(worst, stop_p[j + 1].estimate() - stop_p[j].estimate() - sd2(j, j + 1));
    envelope(r, "stop_monotone", scan.back(), worst, std::nullopt, std::nullopt, 0.0);
    const double drop = stop_p.front().estimate() - stop_p.back().estimate();
    envelope(r, "stop_drop", scan.back(), drop, std::nullopt, sd2(0, scan.size() - 1), std::nullopt, true);
  }
  return r;
}

}  // namespace exlab::detail

#undef EXLAB_LATTICE_KEYS
