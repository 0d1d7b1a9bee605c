#include <catch_amalgamated.hpp>

#include <cmath>
#include <numeric>

#include "exlab/lattice.hpp"

using namespace exlab;

namespace {

std::vector<double> random_field(std::size_t n, std::uint64_t seed) {
  RngStream rng = split_stream(seed, {"field"});
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform();
  return v;
}

JumpKernel long_range_1d() {
  std::vector<std::pair<Coord, double>> r;
  for (int k = 1; k <= 6; ++k) {
    const double q = std::exp(-static_cast<double>(k));
    r.push_back({{k}, q});
    r.push_back({{-k}, q});
  }
  return JumpKernel::from_rates(1, r, true);
}

}  // namespace

TEST_CASE("box indexing") {
  Box b(2, 3);
  CHECK(b.size() == 49);
  CHECK(b.origin() == b.index({0, 0}));
  for (std::size_t i = 0; i < b.size(); ++i) CHECK(b.index(b.coord(i)) == i);
  CHECK(b.first_coord(b.index({-2, 3})) == -2);
  CHECK(b.halfspace_begin(1) == b.index({1, -3}));
  CHECK(b.halfspace_begin(-7) == 0);
  CHECK(b.halfspace_begin(4) == b.size());
  CHECK(b.linf(b.index({1, -3})) == 3);
  CHECK_THROWS(b.index({4, 0}));
  CHECK_THROWS(Box(0, 2));

  Box big(2, 6);
  CHECK(b.site_key(b.index({1, -2})) == big.site_key(big.index({1, -2})));
  CHECK(b.site_key(b.index({1, -2})) != b.site_key(b.index({-2, 1})));
}

TEST_CASE("jump kernel invariants") {
  auto nn = JumpKernel::nearest_neighbour(2);
  CHECK(nn.total_rate() == Catch::Approx(1.0));
  CHECK(nn.rate({0, 1}) == 0.25);
  CHECK_NOTHROW(nn.validate());

  CHECK_THROWS(JumpKernel::from_rates(1, {{{0}, 1.0}, {{1}, 0.5}}, false));
  CHECK_THROWS(JumpKernel::from_rates(1, {{{1}, 1.0}, {{-1}, 0.5}}, true));
  CHECK_THROWS(JumpKernel::from_rates(1, {{{1}, -1.0}}, false));
  CHECK_THROWS(JumpKernel::from_rates(2, {{{1}, 1.0}}, false));

  auto t = JumpKernel::from_rates(1, {{{1}, 1.0}, {{-1}, 1.0}, {{9}, 1e-13}, {{-9}, 1e-13}}, true);
  CHECK(t.rates.size() == 2);
  CHECK(t.dropped_rate == Catch::Approx(2e-13));

  auto drift = JumpKernel::from_rates(1, {{{1}, 0.7}, {{-1}, 0.3}}, false);
  auto adj = drift.adjoint();
  CHECK(adj.rate({1}) == 0.3);
  CHECK(adj.rate({-1}) == 0.7);
}

TEST_CASE("generator examples") {
  auto k = JumpKernel::nearest_neighbour(1);
  Box box(1, 10);
  const std::size_t o = box.origin();

  std::vector<double> c(box.size(), 3.5);
  for (double v : apply_generator(k, box, c)) CHECK(v == 0.0);

  std::vector<double> delta(box.size(), 0.0);
  delta[o] = 1.0;
  auto g = apply_generator(k, box, delta);
  CHECK(g[o] == -1.0);
  CHECK(g[o - 1] == 0.5);
  CHECK(g[o + 1] == 0.5);
  CHECK(g[o + 2] == 0.0);

  std::vector<double> h(box.size(), 0.0);
  for (std::size_t i = o; i < box.size(); ++i) h[i] = 1.0;
  auto gh = apply_generator(k, box, h);
  CHECK(gh[o] == -0.5);
  CHECK(gh[o - 1] == 0.5);
  for (std::size_t i = 1; i + 1 < box.size(); ++i)
    if (i != o && i != o - 1) CHECK(gh[i] == 0.0);
}

TEST_CASE("generator conserves mass and is linear") {
  for (const auto& [k, box] : {std::pair{JumpKernel::nearest_neighbour(1), Box(1, 20)},
                               std::pair{JumpKernel::nearest_neighbour(2), Box(2, 8)},
                               std::pair{long_range_1d(), Box(1, 15)}}) {
    for (std::uint64_t s = 0; s < 5; ++s) {
      auto u = random_field(box.size(), s);
      auto v = random_field(box.size(), s + 100);
      auto gu = apply_generator(k, box, u);
      const double sum = std::accumulate(gu.begin(), gu.end(), 0.0);
      CHECK(std::abs(sum) <= 1e-12);

      std::vector<double> w(box.size());
      for (std::size_t i = 0; i < w.size(); ++i) w[i] = 2.5 * u[i] - 0.75 * v[i];
      auto gv = apply_generator(k, box, v);
      auto gw = apply_generator(k, box, w);
      for (std::size_t i = 0; i < w.size(); ++i) CHECK(gw[i] == Catch::Approx(2.5 * gu[i] - 0.75 * gv[i]).margin(1e-13));
    }
  }
}

TEST_CASE("heat semigroup basics") {
  auto k = JumpKernel::nearest_neighbour(1);
  Box box(1, 12);
  auto x = random_field(box.size(), 3);
  CHECK(heat_semigroup(k, box, x, 0.0) == x);

  std::vector<double> c(box.size(), 2.0);
  for (double v : heat_semigroup(k, box, c, 7.0)) CHECK(v == Catch::Approx(2.0).epsilon(1e-12));

  CHECK_THROWS(heat_semigroup(k, box, x, -1.0));
  x[3] = std::nan("");
  CHECK_THROWS_AS(heat_semigroup(k, box, x, 1.0), std::runtime_error);
}

TEST_CASE("heat semigroup property") {
  for (const auto& [k, box] : {std::pair{JumpKernel::nearest_neighbour(1), Box(1, 20)},
                               std::pair{JumpKernel::nearest_neighbour(2), Box(2, 6)},
                               std::pair{long_range_1d(), Box(1, 15)}}) {
    auto x = random_field(box.size(), 11);
    for (auto [t, s] : {std::pair{0.3, 0.9}, std::pair{1.0, 2.5}, std::pair{4.0, 3.0}}) {
      auto direct = heat_semigroup(k, box, x, t + s);
      auto composed = heat_semigroup(k, box, heat_semigroup(k, box, x, s), t);
      for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(direct[i] - composed[i]) <= 1e-10);
      const double m0 = std::accumulate(x.begin(), x.end(), 0.0);
      const double m1 = std::accumulate(direct.begin(), direct.end(), 0.0);
      CHECK(m1 == Catch::Approx(m0).epsilon(1e-12));
    }
  }
}

TEST_CASE("heat semigroup matches a continuous-time random walk") {
  auto k = JumpKernel::nearest_neighbour(1);
  Box box(1, 20);
  std::vector<double> x0(box.size(), 0.0);
  x0[box.origin()] = 1.0;
  const auto p = heat_semigroup(k, box, x0, 1.0);

  // P_t delta_0 (i) = P_i(W_t = 0) = P_0(W_t = i) by symmetry.
  const int walkers = 1000000;
  const int r = box.radius();
  std::vector<long> counts(box.size(), 0);
  RngStream rng = split_stream(5, {"ctrw"});
  for (int w = 0; w < walkers; ++w) {
    int pos = 0;
    double t = 0.0;
    for (;;) {
      const double rate = (pos == -r || pos == r) ? 0.5 : 1.0;
      t += -std::log(rng.uniform()) / rate;
      if (t > 1.0) break;
      if (pos == -r) pos += 1;
      else if (pos == r) pos -= 1;
      else pos += rng.uniform() < 0.5 ? -1 : 1;
    }
    counts[static_cast<std::size_t>(pos + r)] += 1;
  }
  for (std::size_t i = 0; i < box.size(); ++i) {
    const double est = static_cast<double>(counts[i]) / walkers;
    const double se = std::sqrt(p[i] * (1.0 - p[i]) / walkers);
    CHECK(std::abs(est - p[i]) <= 3.0 * se + 1e-12);
  }
}

TEST_CASE("drift spec") {
  CHECK(DriftSpec::zero()(3.0) == 0.0);
  CHECK(DriftSpec::linear(0.5)(3.0) == 1.5);
  auto t = DriftSpec::from_table(2.0, {{1.0, 1.0}, {2.0, 0.0}});
  CHECK(t(0.0) == 0.0);
  CHECK(t(0.5) == 0.5);
  CHECK(t(1.5) == 0.5);
  CHECK(t(3.0) == -1.0);
  CHECK_THROWS(DriftSpec::from_table(0.5, {{1.0, 1.0}}));
  CHECK_THROWS(DriftSpec::from_table(1.0, {{1.0, 1.0}, {0.5, 0.0}}));
  auto bad = DriftSpec::linear(2.0);
  bad.lipschitz_L = 1.0;
  CHECK_THROWS(bad.validate());
}

TEST_CASE("step_system examples") {
  auto k = JumpKernel::nearest_neighbour(1);
  const auto noise = NoiseSpec::power(0.3);
  const RngStream s = split_stream(1, {0, "lattice"});

  for (auto tr : {Transport::euler, Transport::exponential}) {
    auto z = LatticeState::zeros(1, 5);
    auto out = step_system(z, k, DriftSpec::zero(), noise, 0.01, s, {Scheme::near_zero_ladder, tr});
    for (double v : out.values) CHECK(v == 0.0);
    CHECK(out.time == 0.01);
    CHECK(out.step == 1);
  }

  const double dt = 0.01;
  auto d0 = LatticeState::point_mass(1, 5, {0}, 1.0);
  const std::size_t o = d0.box().origin();
  auto e = step_system(d0, k, DriftSpec::zero(), NoiseSpec::zero(), dt, s, {Scheme::full_truncation, Transport::euler});
  CHECK(e.values[o] == 1.0 - dt);
  CHECK(e.values[o - 1] == dt / 2);
  CHECK(e.values[o + 1] == dt / 2);
  CHECK(e.total_mass() == Catch::Approx(1.0).epsilon(1e-15));

  auto x = step_system(d0, k, DriftSpec::zero(), NoiseSpec::zero(), dt, s, {Scheme::near_zero_ladder, Transport::exponential});
  auto ref = heat_semigroup(k, d0.box(), d0.values, dt);
  for (std::size_t i = 0; i < ref.size(); ++i) CHECK(x.values[i] == Catch::Approx(ref[i]).margin(1e-15));
}

TEST_CASE("euler full truncation matches the explicit formula") {
  auto k = JumpKernel::nearest_neighbour(1);
  auto f = DriftSpec::linear(-0.4);
  auto noise = NoiseSpec::power(0.4);
  LatticeState st = LatticeState::zeros(1, 6);
  st.values = random_field(st.values.size(), 9);
  st.step = 17;
  const double dt = 0.02;
  const RngStream s = split_stream(4, {2, "lattice"});
  auto out = step_system(st, k, f, noise, dt, s, {Scheme::full_truncation, Transport::euler});
  auto gen = apply_generator(k, st.box(), st.values);
  for (std::size_t i = 0; i < st.values.size(); ++i) {
    RngStream rng = s.substream(17, st.box().site_key(i));
    const double xi = rng.normal();
    const double x = st.values[i];
    const double want = std::max(0.0, x + (gen[i] + f(x)) * dt + noise(x) * std::sqrt(dt) * xi);
    CHECK(out.values[i] == Catch::Approx(want).epsilon(1e-14).margin(1e-16));
  }
}

TEST_CASE("lattice steps are deterministic, non-negative and box-local") {
  auto k = JumpKernel::nearest_neighbour(1);
  auto noise = NoiseSpec::power(0.3);
  for (auto sc : {Scheme::full_truncation, Scheme::near_zero_ladder}) {
    SystemStepper a(k, DriftSpec::zero(), noise, 0.01, 1, 8, {sc, Transport::euler});
    auto x0 = LatticeState::point_mass(1, 8, {0}, 1.0);
    auto t1 = simulate_lattice(x0, a, 0.5, 1, split_stream(3, {0, "lattice"}));
    auto t2 = simulate_lattice(x0, a, 0.5, 1, split_stream(3, {0, "lattice"}));
    CHECK(t1.frames == t2.frames);
    for (const auto& fr : t1.frames)
      for (double v : fr) CHECK(v >= 0.0);
  }

  // One Euler step only couples neighbours, so interior sites agree across box sizes.
  SystemStepper small(k, DriftSpec::zero(), noise, 0.01, 1, 5, {Scheme::near_zero_ladder, Transport::euler});
  SystemStepper big(k, DriftSpec::zero(), noise, 0.01, 1, 9, {Scheme::near_zero_ladder, Transport::euler});
  auto xs = LatticeState::zeros(1, 5);
  auto xb = LatticeState::zeros(1, 9);
  for (int c = -3; c <= 3; ++c) {
    xs.values[xs.box().index({c})] = 0.2 + 0.05 * c;
    xb.values[xb.box().index({c})] = 0.2 + 0.05 * c;
  }
  const RngStream s = split_stream(8, {0, "lattice"});
  small.step(xs, s);
  big.step(xb, s);
  for (int c = -3; c <= 3; ++c) CHECK(xs.values[xs.box().index({c})] == xb.values[xb.box().index({c})]);
}

TEST_CASE("copied and moved steppers stay valid") {
  auto k = JumpKernel::nearest_neighbour(1);
  const auto x0 = LatticeState::point_mass(1, 6, {0}, 1.0);
  std::vector<SystemStepper> v;
  for (double g : {0.25, 0.5, 0.75}) v.emplace_back(k, DriftSpec::zero(), NoiseSpec::power(g), 0.01, 1, 6);
  for (std::size_t j = 0; j < v.size(); ++j) {
    SystemStepper fresh(k, DriftSpec::zero(), NoiseSpec::power(0.25 * (j + 1)), 0.01, 1, 6);
    const auto s = split_stream(4, {j, "lattice"});
    CHECK(simulate_lattice(x0, v[j], 0.2, 1, s).frames == simulate_lattice(x0, fresh, 0.2, 1, s).frames);
  }
}

TEST_CASE("total mass is a martingale") {
  auto k = JumpKernel::nearest_neighbour(1);
  auto noise = NoiseSpec::power(0.5);
  SystemStepper st(k, DriftSpec::zero(), noise, 0.01, 1, 10);
  auto x0 = LatticeState::point_mass(1, 10, {0}, 1.0);
  MomentAccumulator acc;
  for (int r = 0; r < 10000; ++r) acc.add(simulate_lattice(x0, st, 1.0, 10, split_stream(21, {r, "lattice"})));
  REQUIRE(acc.times().size() == 11);
  for (std::size_t j = 1; j < acc.times().size(); ++j) {
    const auto& m = acc.total_mass()[j];
    CHECK(std::abs(m.mean() - 1.0) <= 3.0 * m.se());
  }
}

TEST_CASE("first moment check") {
  auto k = JumpKernel::nearest_neighbour(1);
  auto x0 = LatticeState::point_mass(1, 10, {0}, 1.0);

  SECTION("deterministic heat flow is reproduced exactly") {
    SystemStepper st(k, DriftSpec::zero(), NoiseSpec::zero(), 0.01, 1, 10);
    MomentAccumulator acc;
    acc.add(simulate_lattice(x0, st, 1.0, 25, split_stream(1, {0, "lattice"})));
    auto rep = first_moment_check(acc, k, DriftSpec::zero(), x0, 3.0, 1e-12);
    CHECK(rep.equality_checked);
    CHECK(rep.equality_pass());
    CHECK(rep.bound_pass());
  }

  SECTION("linear growth respects the exponential bound") {
    auto f = DriftSpec::linear(0.5);
    SystemStepper st(k, f, NoiseSpec::power(0.3), 0.01, 1, 10);
    MomentAccumulator acc;
    for (int r = 0; r < 500; ++r) acc.add(simulate_lattice(x0, st, 1.0, 25, split_stream(2, {r, "lattice"})));
    auto rep = first_moment_check(acc, k, f, x0);
    CHECK_FALSE(rep.equality_checked);
    CHECK(rep.bound_pass());
    CHECK(rep.rows.size() == 5 * x0.values.size());
  }

  SECTION("a biased ensemble is caught") {
    MomentAccumulator acc;
    LatticeTrajectory tr;
    tr.dim = 1;
    tr.box_radius = 10;
    tr.times = {0.0, 1.0};
    auto heat = heat_semigroup(k, x0.box(), x0.values, 1.0);
    for (auto& v : heat) v *= 1.2;
    tr.frames = {x0.values, heat};
    acc.add(tr);
    acc.add(tr);
    auto rep = first_moment_check(acc, k, DriftSpec::zero(), x0);
    CHECK_FALSE(rep.equality_pass());
    CHECK_FALSE(rep.bound_pass());
  }
}
