#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "drivers.hpp"
#include "exlab/bvp.hpp"
#include "exlab/stats.hpp"

namespace exlab::detail {

namespace {

const char* outcome_text(ExitKind k) {
  switch (k) {
    case ExitKind::up: return "up";
    case ExitKind::down: return "down";
    case ExitKind::censored: return "censored";
  }
  return "?";
}

std::size_t step_count(double horizon, double dt) {
  return static_cast<std::size_t>(std::ceil(horizon / dt - 1e-9));
}

Proportion exceed(const std::vector<ExitOutcome>& out, double t) {
  Proportion p;
  p.trials = out.size();
  for (const auto& o : out) p.successes += o.kind == ExitKind::censored || o.time > t;
  return p;
}

void censor_warning(ResultSet& r, std::size_t censored, std::size_t n, const std::string& what) {
  if (censored > 0)
    r.warnings.push_back(what + ": " + std::to_string(censored) + " of " + std::to_string(n) + " replicas censored");
}

}  // namespace

// ---------------------------------------------------------------- sde1d

void check_sde1d(const ExperimentConfig& c) {
  const auto& m = c.model;
  check_keys(m, {"experiment", "gamma", "noise", "delta", "zeta", "z0", "scheme", "bridge", "eps", "tail_points"});
  const auto e = experiment_of(m, "up_leg", {"up_leg", "terminal"});
  sde_params(m);
  scheme_from_json(m);
  if (e == "up_leg") {
    positive(m, "delta");
    positive(m, "zeta");
  } else if (m.contains("eps")) {
    positive(m, "eps");
  }
}

ResultSet run_sde1d(const ExperimentConfig& c, unsigned threads) {
  check_sde1d(c);
  const auto& m = c.model;
  const auto params = sde_params(m);
  const auto opt = run_options(m, threads);
  ResultSet r;
  init_summary(r);
  r.csv_from_summary = false;

  if (experiment_of(m, "up_leg", {"up_leg", "terminal"}) == "up_leg") {
    const double zeta = positive(m, "zeta");
    const double delta = params.delta;
    const auto st = up_leg_times(delta, params.noise, zeta, c.replicas, c.dt, c.seed, opt);
    r.records.columns = {"replica", "tau"};
    std::vector<double> sq;
    for (std::size_t i = 0; i < st.outcomes.size(); ++i) {
      const auto& o = st.outcomes[i];
      r.records.add_row({static_cast<double>(i), o.kind == ExitKind::censored ? Cell{} : Cell{o.time}});
    }
    for (double t : st.times) sq.push_back(t * t);
    const auto tau = mean_aggregate("tau", st.times);
    const auto tau2 = mean_aggregate("tau_squared", sq);
    add_aggregate(r, tau);
    add_aggregate(r, tau2);
    add_aggregate(r, proportion_aggregate("censored", st.censored, c.replicas));
    censor_warning(r, st.censored, c.replicas, "up_leg");

    const double target = zeta / delta;
    envelope(r, "mean_tau", 0, tau.mean, tau.se, target - 3.0 * tau.se, target + 3.0 * tau.se);
    envelope(r, "second_moment", 0, tau2.mean, tau2.se, std::nullopt,
             1296.0 * zeta * zeta / (delta * delta) + 3.0 * tau2.se);
    const int points = m.value("tail_points", 20);
    for (int k = 1; k <= points; ++k) {
      const double t = k * zeta / delta;
      const auto p = exceed(st.outcomes, t);
      envelope(r, "tail", t, p.estimate(), p.se(), std::nullopt,
               2.0 * std::exp(-delta * t / (18.0 * zeta)) + 3.0 * p.se());
    }
    r.csv_columns = r.records.columns;
    return r;
  }

  const double eps = m.value("eps", 0.0);
  struct Rec {
    double zT = 0.0;
    double occ = 0.0;
  };
  std::vector<Rec> recs(c.replicas);
  std::vector<std::uint8_t> ok(c.replicas, 0);
  const auto failures = parallel_for(c.replicas, threads, [&](std::size_t i) {
    auto rng = split_stream(c.seed, {i});
    const auto path = simulate_path(params, c.horizon, c.dt, rng, opt.scheme);
    recs[i].zT = path.values.back();
    if (eps > 0.0) recs[i].occ = occupation_time(path, eps, c.horizon);
    ok[i] = 1;
  });
  note_failures(r, failures);
  r.records.columns = {"replica", "z_T"};
  if (eps > 0.0) r.records.columns.push_back("occupation");
  std::vector<double> zt, occ;
  for (std::size_t i = 0; i < c.replicas; ++i) {
    if (!ok[i]) continue;
    std::vector<Cell> row{static_cast<double>(i), recs[i].zT};
    if (eps > 0.0) row.emplace_back(recs[i].occ);
    r.records.add_row(std::move(row));
    zt.push_back(recs[i].zT);
    occ.push_back(recs[i].occ);
  }
  const auto a = mean_aggregate("z_T", zt);
  add_aggregate(r, a);
  if (eps > 0.0) add_aggregate(r, mean_aggregate("occupation", occ));
  // E[Z_T] = z0 + delta T; the noise is a martingale.
  const double target = params.z0 + params.delta * c.horizon;
  const double slack = 3.0 * a.se + 1e-12;
  envelope(r, "mean_terminal", c.horizon, a.mean, a.se, target - slack, target + slack);
  r.csv_columns = r.records.columns;
  return r;
}

// ---------------------------------------------------------------- ladder

namespace {

constexpr std::initializer_list<const char*> kLadderExperiments = {"interval_exit", "two_zeta", "exit_scaling",
                                                                   "excursions", "downcross_count"};

void exit_records(ResultSet& r, double level, const std::vector<ExitOutcome>& out) {
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto& o = out[i];
    r.records.add_row({level, static_cast<double>(i), std::string(outcome_text(o.kind)),
                       o.kind == ExitKind::censored ? Cell{} : Cell{o.time}});
  }
}

void run_interval_exit(const ExperimentConfig& c, const RunOptions& opt, ResultSet& r) {
  const auto& m = c.model;
  const auto params = sde_params(m);
  LadderConfig lc{positive(m, "zeta"), m.value("depth", 3)};
  r.records.columns = {"n", "replica", "outcome", "time"};
  for (double nd : number_list(m, "levels", {1.0})) {
    const int n = static_cast<int>(nd);
    const auto st = interval_exit_stats(params, lc, n, c.replicas, c.dt, c.seed, opt);
    exit_records(r, n, st.outcomes);
    for (const auto& w : st.warnings) r.warnings.push_back("interval_exit n=" + std::to_string(n) + ": " + w);
    add_aggregate(r, proportion_aggregate("exit_up_n" + std::to_string(n), st.up.successes, st.up.trials));
    const double p = st.up.estimate(), se = st.up.se();
    if (params.delta == 0.0) {
      // Optional stopping: exactly 1/3.
      const auto w = st.up.wilson(3.0);
      add_check(r, "interval_exit_up", n, p, se, w.lo, w.hi, w.contains(1.0 / 3.0), 1.0 / 3.0);
    } else {
      envelope(r, "interval_exit_up", n, p, se, 1.0 / 3.0 - 3.0 * se, std::nullopt);
    }
  }
}

void run_two_zeta(const ExperimentConfig& c, const RunOptions& opt, ResultSet& r) {
  const auto& m = c.model;
  const auto params = sde_params(m);
  const double zeta = positive(m, "zeta");
  const auto st = two_zeta_hitting(params, zeta, c.replicas, c.dt, c.seed, opt);
  r.records.columns = {"zeta", "replica", "outcome", "time"};
  exit_records(r, zeta, st.outcomes);
  for (const auto& w : st.warnings) r.warnings.push_back("two_zeta: " + w);
  add_aggregate(r, proportion_aggregate("two_zeta_up", st.up.successes, st.up.trials));
  std::vector<double> times;
  for (const auto& o : st.outcomes)
    if (o.kind != ExitKind::censored) times.push_back(o.time);
  add_aggregate(r, mean_aggregate("exit_time", times));
  const double p = st.up.estimate(), se = st.up.se();
  envelope(r, "two_zeta_up", zeta, p, se, 0.5 - 3.0 * se, m.value("upper", 0.55));
}

void run_exit_scaling(const ExperimentConfig& c, const RunOptions& opt, ResultSet& r) {
  const auto& m = c.model;
  const auto params = sde_params(m);
  const double gamma = params.noise.gamma;
  const double expo = 2.0 - 2.0 * gamma;
  const auto zetas = number_list(m, "zetas", {0x1p-6, 0x1p-7, 0x1p-8, 0x1p-9, 0x1p-10});
  if (zetas.size() < 3) throw std::invalid_argument("exit_scaling: need at least three zetas");
  const double zmax = *std::max_element(zetas.begin(), zetas.end());
  const double spacing = positive(m, "tail_spacing", 0.5);
  const double tol = positive(m, "exponent_tol", 0.15);
  r.records.columns = {"zeta", "replica", "outcome", "time"};
  std::vector<std::pair<double, double>> points;
  for (std::size_t j = 0; j < zetas.size(); ++j) {
    const double zeta = zetas[j];
    if (!(zeta > 0.0)) throw std::invalid_argument("exit_scaling: zetas must be positive");
    // Same number of steps per natural time unit at every level.
    const double dt = c.dt * std::pow(zeta / zmax, expo);
    const auto seed = hash_path(c.seed, {"exit-scaling", j});
    const auto st = two_zeta_hitting(params, zeta, c.replicas, dt, seed, opt);
    exit_records(r, zeta, st.outcomes);
    for (const auto& w : st.warnings) r.warnings.push_back("exit_scaling zeta=" + format_number(zeta) + ": " + w);
    std::vector<double> times;
    for (const auto& o : st.outcomes)
      if (o.kind != ExitKind::censored) times.push_back(o.time);
    const auto a = mean_aggregate("exit_time_zeta_" + format_number(zeta), times);
    add_aggregate(r, a);
    points.emplace_back(zeta, a.mean);

    // Geometric tail: log P(tau > m s zeta^expo) linear and decreasing in m.
    const double scale = spacing * std::pow(zeta, expo);
    std::vector<double> ms, logs;
    for (int k = 1; k <= 10; ++k) {
      const auto p = exceed(st.outcomes, k * scale);
      if (p.successes < 10) break;
      ms.push_back(k);
      logs.push_back(std::log(p.estimate()));
    }
    if (ms.size() >= 3) {
      const auto fit = linear_fit(ms, logs);
      envelope(r, "exit_tail_slope", zeta, fit.slope, std::nullopt, std::nullopt, 0.0, true);
      envelope(r, "exit_tail_r2", zeta, fit.r2, std::nullopt, 0.9, std::nullopt);
    } else {
      add_check(r, "exit_tail_points", zeta, static_cast<double>(ms.size()), std::nullopt, 3.0, std::nullopt, false,
                3.0);
    }
  }
  const auto fit = fit_scaling(points);
  envelope(r, "exit_scaling_exponent", gamma, fit.exponent, std::nullopt, expo - tol, expo + tol);
  add_aggregate(r, Aggregate{"exit_scaling_r2", points.size(), fit.r2, 0.0, 0.0, fit.r2, fit.r2});
}

void run_excursions(const ExperimentConfig& c, const RunOptions& opt, ResultSet& r) {
  const auto& m = c.model;
  auto params = sde_params(m);
  const double zeta = positive(m, "zeta");
  params.z0 = zeta;
  const int kmax = m.value("kmax", 5);
  LadderConfig lc{zeta, m.value("depth", kmax + 4)};
  const auto st = excursion_heights(params, lc, c.replicas, c.dt, c.seed, opt);
  const std::size_t n = st.replicas();
  r.records.columns = {"replica", "height", "duration", "censored"};
  for (std::size_t i = 0; i < n; ++i)
    r.records.add_row({static_cast<double>(i), static_cast<double>(st.height[i]), st.duration[i],
                       static_cast<double>(st.censored[i])});
  add_aggregate(r, proportion_aggregate("censored", st.censored_count(), n));
  censor_warning(r, st.censored_count(), n, "excursions");

  for (int k = 1; k <= kmax; ++k) {
    const auto p = st.height_at_least(k + 1);
    const double w = std::ldexp(1.0, -k);
    envelope(r, "height_ratio", k, p.estimate() / w, p.se() / w, m.value("ratio_lo", 0.5), m.value("ratio_hi", 1.5));
  }

  // Calibrate C so that half of the excursions outlast C (2 zeta)^expo.
  const double expo = 2.0 - 2.0 * params.noise.gamma;
  const double C = quantile(st.duration, 0.5) / std::pow(2.0 * zeta, expo);
  add_aggregate(r, Aggregate{"duration_multiplier", n, C, 0.0, 0.0, C, C});
  for (int k = 1; k <= kmax; ++k) {
    const double t = C * std::pow(std::ldexp(zeta, k), expo);
    Proportion p;
    p.trials = n;
    for (std::size_t i = 0; i < n; ++i) p.successes += st.censored[i] || st.duration[i] > t;
    envelope(r, "duration_tail", k, p.estimate(), p.se(), std::nullopt, std::ldexp(1.0, -k) + 3.0 * p.se());
  }
}

void run_downcross_count(const ExperimentConfig& c, const RunOptions& opt, ResultSet& r) {
  const auto& m = c.model;
  const auto params = sde_params(m);
  const double zeta = positive(m, "zeta");
  const double eps = positive(m, "eps", 0.2);
  if (!(params.delta > 0.0)) throw std::invalid_argument("downcross_count: delta must be positive");
  const Stepper stepper(params.noise, c.dt, opt.scheme);
  const std::size_t steps = step_count(c.horizon, c.dt);
  std::vector<double> counts(c.replicas, 0.0);
  std::vector<std::uint8_t> ok(c.replicas, 0);
  const auto failures = parallel_for(c.replicas, opt.threads, [&](std::size_t i) {
    auto rng = split_stream(c.seed, {i});
    const ConstantDrift drift{params.delta};
    DowncrossCounter counter(zeta, opt.bridge);
    double z = params.z0;
    for (std::size_t k = 0; k < steps; ++k) {
      const auto res = stepper.advance(z, drift, rng);
      counter.push(static_cast<double>(k) * c.dt, c.dt, z, res.value, res.touched_zero, params.noise(z), rng);
      z = res.value;
    }
    counts[i] = static_cast<double>(counter.count());
    ok[i] = 1;
  });
  note_failures(r, failures);
  r.records.columns = {"replica", "count"};
  std::vector<double> kept;
  const double t = static_cast<double>(steps) * c.dt;
  const double need = std::ceil((1.0 - 2.0 * eps) * params.delta * t / zeta);
  Proportion shortfall;
  for (std::size_t i = 0; i < c.replicas; ++i) {
    if (!ok[i]) continue;
    r.records.add_row({static_cast<double>(i), counts[i]});
    kept.push_back(counts[i]);
    shortfall.trials++;
    shortfall.successes += counts[i] < need;
  }
  add_aggregate(r, mean_aggregate("count", kept));
  add_aggregate(r, Aggregate{"count_threshold", kept.size(), need, 0.0, 0.0, need, need});
  const double se = shortfall.trials ? shortfall.se() : 0.0;
  envelope(r, "downcross_shortfall", t, shortfall.trials ? shortfall.estimate() : 1.0, se, std::nullopt,
           eps + 3.0 * se, true);
}

}  // namespace

void check_ladder(const ExperimentConfig& c) {
  const auto& m = c.model;
  check_keys(m, {"experiment", "gamma", "noise", "delta", "zeta", "zetas", "z0", "scheme", "bridge", "depth", "levels",
                 "upper", "tail_spacing", "exponent_tol", "kmax", "ratio_lo", "ratio_hi", "eps"});
  const auto e = experiment_of(m, "interval_exit", kLadderExperiments);
  sde_params(m);
  scheme_from_json(m);
  if (e != "exit_scaling") positive(m, "zeta");
}

ResultSet run_ladder(const ExperimentConfig& c, unsigned threads) {
  check_ladder(c);
  const auto e = experiment_of(c.model, "interval_exit", kLadderExperiments);
  const auto opt = run_options(c.model, threads);
  ResultSet r;
  init_summary(r);
  if (e == "interval_exit") run_interval_exit(c, opt, r);
  else if (e == "two_zeta") run_two_zeta(c, opt, r);
  else if (e == "exit_scaling") run_exit_scaling(c, opt, r);
  else if (e == "excursions") run_excursions(c, opt, r);
  else run_downcross_count(c, opt, r);
  return r;
}

// ---------------------------------------------------------------- zeroset

void check_zeroset(const ExperimentConfig& c) {
  const auto& m = c.model;
  check_keys(m, {"gamma", "noise", "delta", "zeta", "zetas", "z0", "scheme", "eps", "expect", "threshold",
                 "agreement", "max_zero_run_steps"});
  const auto p = sde_params(m);
  if (!(p.delta > 0.0)) throw std::invalid_argument("zeroset: delta must be positive");
  scheme_from_json(m);
  const std::string expect = m.value("expect", std::string("positive"));
  if (expect != "positive" && expect != "null") throw std::invalid_argument("zeroset: expect is positive or null");
  if (!m.contains("zetas")) positive(m, "zeta");
  positive(m, "eps", 1e-4);
}

ResultSet run_zeroset(const ExperimentConfig& c, unsigned threads) {
  check_zeroset(c);
  const auto& m = c.model;
  const auto params = sde_params(m);
  const auto scheme = scheme_from_json(m);
  std::vector<double> zetas;
  if (m.contains("zetas")) {
    zetas = number_list(m, "zetas", {});
  } else {
    const double z = positive(m, "zeta");
    zetas = {z, z / 2.0};
  }
  if (zetas.size() < 2) throw std::invalid_argument("zeroset: need at least two zetas");
  const double eps = positive(m, "eps", 1e-4);
  const bool positive_case = m.value("expect", std::string("positive")) == "positive";
  const double threshold = m.value("threshold", positive_case ? 0.01 : 0.005);
  const double agreement = m.value("agreement", 0.25);
  const double max_run = m.value("max_zero_run_steps", 10.0) * c.dt;

  struct Rec {
    std::vector<double> dc;
    double occ = 0.0;
    double run = 0.0;
  };
  std::vector<Rec> recs(c.replicas);
  std::vector<std::uint8_t> ok(c.replicas, 0);
  const auto failures = parallel_for(c.replicas, threads, [&](std::size_t i) {
    auto rng = split_stream(c.seed, {i});
    const auto path = simulate_path(params, c.horizon, c.dt, rng, scheme);
    ZeroSetEstimates est;
    est.zetas = zetas;
    est.delta = params.delta;
    est.horizon = c.horizon;
    est.eps = eps;
    est.add(path);
    recs[i] = {est.downcross[0], est.occupation[0], longest_zero_run(path)};
    ok[i] = 1;
  });

  ResultSet r;
  init_summary(r);
  note_failures(r, failures);
  r.records.columns = {"replica"};
  for (std::size_t j = 0; j < zetas.size(); ++j) r.records.columns.push_back("downcross_" + std::to_string(j));
  r.records.columns.insert(r.records.columns.end(), {"occupation", "longest_zero_run"});
  std::vector<std::vector<double>> dc(zetas.size());
  std::vector<double> occ;
  double longest = 0.0;
  for (std::size_t i = 0; i < c.replicas; ++i) {
    if (!ok[i]) continue;
    std::vector<Cell> row{static_cast<double>(i)};
    for (std::size_t j = 0; j < zetas.size(); ++j) {
      row.emplace_back(recs[i].dc[j]);
      dc[j].push_back(recs[i].dc[j]);
    }
    row.emplace_back(recs[i].occ);
    row.emplace_back(recs[i].run);
    r.records.add_row(std::move(row));
    occ.push_back(recs[i].occ);
    longest = std::max(longest, recs[i].run);
  }

  std::vector<Aggregate> a;
  for (std::size_t j = 0; j < zetas.size(); ++j) {
    a.push_back(mean_aggregate("downcross_zeta_" + format_number(zetas[j]), dc[j]));
    add_aggregate(r, a.back());
  }
  const auto ao = mean_aggregate("occupation", occ);
  add_aggregate(r, ao);
  const auto rel = [](double x, double ref) { return ref != 0.0 ? std::fabs(x / ref - 1.0) : INFINITY; };

  if (positive_case) {
    for (std::size_t j = 0; j < zetas.size(); ++j)
      envelope(r, "zero_set_downcross", zetas[j], a[j].mean, a[j].se, threshold, std::nullopt, true);
    for (std::size_t j = 1; j < zetas.size(); ++j)
      envelope(r, "downcross_agreement", zetas[j], rel(a[j].mean, a[j - 1].mean), std::nullopt, std::nullopt,
               agreement);
    envelope(r, "occupation_agreement", eps, rel(ao.mean, a.back().mean), std::nullopt, std::nullopt, agreement);
    envelope(r, "longest_zero_run", c.dt, longest, std::nullopt, std::nullopt, max_run, true);
  } else {
    for (std::size_t j = 0; j < zetas.size(); ++j)
      envelope(r, "zero_set_downcross", zetas[j], a[j].mean, a[j].se, std::nullopt, threshold, true);
    envelope(r, "zero_set_occupation", eps, ao.mean, ao.se, std::nullopt, threshold, true);
  }
  return r;
}

// ---------------------------------------------------------------- bvp

namespace {

struct BvpModel {
  std::string family;
  BvpProblem problem;
  double zeta = 0.0, c4 = 0.2, c5 = 0.1;
  int check_n = 0;
};

BvpModel bvp_model(const Json& m) {
  check_keys(m, {"family", "p", "N", "left", "right", "zeta", "c4", "c5", "check_n"});
  BvpModel b;
  b.family = m.value("family", std::string("constant"));
  const double left = m.value("left", 1.0), right = m.value("right", 0.0);
  if (b.family == "constant") {
    b.problem = BvpProblem::constant(m.at("p").get<double>(), m.value("N", 100), left, right);
  } else if (b.family == "pbar") {
    b.zeta = positive(m, "zeta");
    b.c4 = m.value("c4", b.c4);
    b.c5 = m.value("c5", b.c5);
    const int N = m.value("N", 400);
    b.problem.N = N;
    b.problem.left_value = left;
    b.problem.right_value = right;
    b.problem.p = pbar_sequence(b.zeta, N, b.c4, b.c5);
    b.check_n = m.value("check_n", 200);
    if (b.check_n < 1) throw std::invalid_argument("bvp: check_n must be >= 1");
  } else if (b.family == "explicit") {
    // Interior coefficients p_1..p_{N-1}.
    const auto inner = m.at("p").get<std::vector<double>>();
    b.problem.N = static_cast<int>(inner.size()) + 1;
    b.problem.left_value = left;
    b.problem.right_value = right;
    b.problem.p.assign(inner.size() + 2, 0.0);
    std::copy(inner.begin(), inner.end(), b.problem.p.begin() + 1);
  } else {
    throw std::invalid_argument("bvp: unknown family " + b.family);
  }
  b.problem.validate();
  return b;
}

}  // namespace

void check_bvp(const ExperimentConfig& c) { bvp_model(c.model); }

ResultSet run_bvp(const ExperimentConfig& c) {
  const auto b = bvp_model(c.model);
  const auto& pr = b.problem;
  const auto sol = solve_bvp(pr);
  const int N = pr.N;
  ResultSet r;
  r.records.columns = {"n", "p", "g"};
  for (int n = 0; n <= N; ++n)
    r.records.add_row({static_cast<double>(n), (n == 0 || n == N) ? Cell{} : Cell{pr.p[n]}, sol.g[n]});
  r.csv_columns = r.records.columns;
  const double tol = 1e-12;
  r.predicates.push_back({"residual", sol.residual, tol, sol.residual <= tol});

  if (b.family == "constant") {
    const double p = pr.p[1];
    double err = 0.0;
    if (p == 0.5) {
      for (int n = 0; n <= N; ++n) {
        const double lin = pr.left_value + (pr.right_value - pr.left_value) * n / N;
        err = std::max(err, std::fabs(sol.g[n] - lin));
      }
      r.predicates.push_back({"linear_solution", err, tol, err <= tol});
    } else if (p > 0.0 && p < 1.0) {
      // g = A + B rho^n with rho = p / (1 - p).
      const double rho = p / (1.0 - p);
      const double rN = std::pow(rho, N);
      const double B = (pr.right_value - pr.left_value) / (rN - 1.0);
      const double A = pr.left_value - B;
      for (int n = 0; n <= N; ++n) err = std::max(err, std::fabs(sol.g[n] - (A + B * std::pow(rho, n))));
      r.predicates.push_back({"closed_form", err, tol, err <= tol});
    }
  } else if (b.family == "pbar") {
    const double K = k_zeta(b.zeta, b.c4);
    const int top = b.check_n + 1;
    std::vector<double> q(static_cast<std::size_t>(top) + 1);
    for (int n = 0; n <= top; ++n) q[n] = q_supersolution(K, n);
    const auto p = pbar_sequence(b.zeta, top + 1, b.c4, b.c5);
    double worst = INFINITY;
    int first_bad = 0, bad = 0;
    for (int n = 1; n <= b.check_n; ++n) {
      const double v = -apply_discrete_op(p, q, n);
      worst = std::min(worst, v);
      if (v < 0.0 && bad++ == 0) first_bad = n;
    }
    r.predicates.push_back({"supersolution_min", worst, 0.0, worst >= 0.0});
    if (bad > 0)
      r.warnings.push_back("supersolution sign fails at " + std::to_string(bad) + " of " + std::to_string(b.check_n) +
                           " sites, first at n=" + std::to_string(first_bad));
    r.predicates.push_back({"q_at_0", q[0], 1.0, q[0] == 1.0});
    r.predicates.push_back({"g1_bound", sol.g[1], q[1], sol.g[1] <= q[1]});
    add_aggregate(r, Aggregate{"K_zeta", 1, K, 0.0, 0.0, K, K});
    add_aggregate(r, Aggregate{"c4", 1, b.c4, 0.0, 0.0, b.c4, b.c4});
    add_aggregate(r, Aggregate{"c5", 1, b.c5, 0.0, 0.0, b.c5, b.c5});
  }
  return r;
}

}  // namespace exlab::detail
