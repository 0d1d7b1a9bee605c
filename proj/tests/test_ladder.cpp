#include <catch_amalgamated.hpp>

#include <cmath>

#include "exlab/ladder.hpp"

using namespace exlab;

namespace {

Path1D make_path(std::vector<double> v, double dt = 1.0) {
  Path1D p;
  p.dt = dt;
  p.values = std::move(v);
  return p;
}

}  // namespace

TEST_CASE("ladder levels") {
  LadderConfig c{0.01, 4};
  CHECK(c.level(0) == 0.01);
  CHECK(c.level(3) == 0.00125);
  CHECK_THROWS((LadderConfig{0.0, 2}).validate());
  CHECK_THROWS((LadderConfig{1.0, 0}).validate());
}

TEST_CASE("embedded walk examples") {
  const double z = 0.01;
  LadderConfig c{z, 3};
  auto w = embedded_walk(make_path({z, z / 2, z}), c);
  CHECK(w.s == std::vector<int>{0, 1, 0});
  CHECK(w.sigma_times == std::vector<double>{0.0, 1.0, 2.0});

  w = embedded_walk(make_path({z, z / 2, 0.7 * z, z / 2, 0.7 * z}), c);
  CHECK(w.s == std::vector<int>{0, 1});

  w = embedded_walk(make_path({z, z / 2, 0.6 * z, 0.4 * z, 0.8 * z}), c);
  CHECK(w.s == std::vector<int>{0, 1});

  // One segment crossing several levels.
  w = embedded_walk(make_path({z, 0.0}), c);
  CHECK(w.s == std::vector<int>{0, 1, 2, 3});
  CHECK(w.sigma_times[2] == Catch::Approx(0.75));
}

TEST_CASE("embedded walk on simulated paths has unit steps") {
  LadderConfig c{0.02, 6};
  SdeParams prm{0.02, NoiseSpec::power(0.3), 0.02};
  for (std::uint64_t r = 0; r < 20; ++r) {
    auto s = split_stream(4, {r});
    const auto w = embedded_walk(simulate_path(prm, 0.2, 1e-5, s), c);
    for (std::size_t k = 1; k < w.s.size(); ++k) {
      CHECK(std::abs(w.s[k] - w.s[k - 1]) == 1);
      CHECK(w.sigma_times[k] > w.sigma_times[k - 1]);
    }
  }
}

TEST_CASE("bridge crossing probability") {
  CHECK(bridge_cross_probability(0.1, 0.3, 0.2, 1.0, 0.01) == 1.0);
  CHECK(bridge_cross_probability(0.1, 0.15, 0.2, 1.0, 0.01) == Catch::Approx(std::exp(-2.0 * 0.1 * 0.05 / 0.01)));
  CHECK(bridge_cross_probability(0.1, 0.15, 0.2, 0.0, 0.01) == 0.0);
}

TEST_CASE("martingale exit probability is 1/3") {
  SdeParams prm{0.0, NoiseSpec::power(0.3), 0.0};
  LadderConfig c{0.01, 4};
  const double dt = std::pow(c.level(4), 1.4) / 50;
  const auto st = interval_exit_stats(prm, c, 2, 3000, dt, 5);
  CHECK(st.up.wilson(3.0).contains(1.0 / 3.0));
  CHECK(st.censored == 0);
  CHECK(st.tail.size() == 10);
  for (std::size_t m = 1; m < st.tail.size(); ++m) CHECK(st.tail[m].estimate() <= st.tail[m - 1].estimate());
  CHECK_THROWS(interval_exit_stats(prm, c, 0, 3000, dt, 5));
  CHECK_THROWS(interval_exit_stats(prm, c, 2, 50, dt, 5));
}

TEST_CASE("P(2 zeta before 0) = 1/2 at delta = 0 across scales") {
  for (int j : {4, 7, 10}) {
    const double zeta = std::ldexp(1.0, -j);
    SdeParams prm{0.0, NoiseSpec::power(0.25), zeta};
    const auto st = two_zeta_hitting(prm, zeta, 2000, std::pow(zeta, 1.5) / 200, 100 + j);
    CHECK(st.up.wilson(3.0).contains(0.5));
  }
}

TEST_CASE("more drift does not lower the up-hitting probability") {
  const double zeta = 1e-2;
  const double dt = std::pow(zeta, 1.5) / 200;
  const auto p0 = two_zeta_hitting({0.0, NoiseSpec::power(0.25), zeta}, zeta, 2000, dt, 9);
  const auto p1 = two_zeta_hitting({0.1, NoiseSpec::power(0.25), zeta}, zeta, 2000, dt, 9);
  CHECK(p1.up.estimate() >= p0.up.estimate() - 3.0 * p0.up.se());
}

TEST_CASE("excursion heights start at 1") {
  SdeParams prm{0.01, NoiseSpec::power(0.25), 1e-3};
  const auto st = excursion_heights(prm, {1e-3, 4}, 1000, std::pow(1e-3, 1.5) / 50, 3);
  CHECK(st.height_at_least(1).estimate() == 1.0);
  CHECK(st.height_at_least(2).estimate() < 1.0);
  CHECK(st.replicas() == 1000);
}

TEST_CASE("downcrossings on synthetic paths") {
  const double z = 0.5;
  const auto rec = downcrossings(make_path({0.0, z, 0.0, z, 0.0}), z, 4.0);
  CHECK(rec.tau == std::vector<double>{1.0, 3.0});
  CHECK(rec.gamma == std::vector<double>{2.0, 4.0});
  CHECK(rec.count_at(4.0) == 2);
  CHECK(rec.count_at(3.5) == 1);
  CHECK(downcrossings(make_path({0.0, 0.2, 0.0, 0.4}), z, 3.0).gamma.empty());
  // Horizon cuts the count.
  CHECK(downcrossings(make_path({0.0, z, 0.0, z, 0.0}), z, 3.0).count_at(3.0) == 1);
}

TEST_CASE("downcross counts are non-decreasing") {
  SdeParams prm{0.05, NoiseSpec::power(0.25), 0.0};
  auto s = split_stream(8, {});
  const auto p = simulate_path(prm, 1.0, 1e-4, s);
  const auto rec = downcrossings(p, 0.01, 1.0);
  std::size_t prev = 0;
  for (double t = 0.0; t <= 1.0; t += 0.01) {
    CHECK(rec.count_at(t) >= prev);
    prev = rec.count_at(t);
  }
  for (std::size_t i = 0; i < rec.gamma.size(); ++i) {
    CHECK(rec.tau[i] < rec.gamma[i]);
    if (i + 1 < rec.tau.size()) CHECK(rec.gamma[i] < rec.tau[i + 1]);
  }
}

TEST_CASE("up/down decomposition") {
  DowncrossRecord rec;
  rec.tau = {0.5, 2.0, 4.5};
  rec.gamma = {1.0, 3.0};
  auto ud = updown_decomposition(rec, 2);
  CHECK(ud.t_up == 0.5 + 1.0);
  CHECK(ud.t_down == 0.5 + 1.0);
  CHECK(ud.complete);
  ud = updown_decomposition(rec, 3);
  CHECK_FALSE(ud.complete);
  CHECK(ud.used == 2);

  SdeParams prm{0.05, NoiseSpec::power(0.25), 0.0};
  auto s = split_stream(12, {});
  const auto r = downcrossings(simulate_path(prm, 1.0, 1e-4, s), 0.005, 1.0);
  REQUIRE(r.gamma.size() >= 3);
  for (std::size_t n = 1; n <= r.gamma.size(); ++n) {
    const auto u = updown_decomposition(r, n);
    CHECK(std::fabs(u.t_up + u.t_down - r.gamma[n - 1]) < 1e-12);
  }
}

TEST_CASE("up-leg mean, tail and second moment") {
  const double delta = 0.1, zeta = 0.05;
  const auto st = up_leg_times(delta, NoiseSpec::power(0.3), zeta, 3000, 3e-4, 21);
  REQUIRE(st.censored == 0);
  RunningStats m, m2;
  for (double t : st.times) {
    m.add(t);
    m2.add(t * t);
  }
  CHECK(std::fabs(m.mean() - zeta / delta) < 3.0 * m.se());
  CHECK(m2.mean() <= 1296.0 * zeta * zeta / (delta * delta) + 3.0 * m2.se());
  // Bounded-stop tail with b = zeta.
  for (double t = 0.25; t <= 3.0; t += 0.25) {
    Proportion p;
    for (double x : st.times) {
      p.trials++;
      p.successes += x > t;
    }
    CHECK(p.estimate() <= 2.0 * std::exp(-delta * t / (18.0 * zeta)) + 3.0 * p.se());
  }
}

TEST_CASE("zero-set estimators on degenerate paths") {
  const auto est = zero_set_measure({make_path(std::vector<double>(11, 0.0), 0.1)}, {0.01, 0.005}, 0.05, 1.0, 1e-4);
  CHECK(est.downcross[0][0] == 0.0);
  CHECK(est.downcross[0][1] == 0.0);
  CHECK(est.occupation[0] == Catch::Approx(1.0));
  CHECK_THROWS(zero_set_measure({}, {0.01}, 0.05, 1.0, 1e-4));
}

TEST_CASE("longest zero run") {
  CHECK(longest_zero_run(make_path({0.0, 0.0, 0.0, 1.0, 0.0}, 0.5)) == 1.0);
  CHECK(longest_zero_run(make_path({1.0, 0.0, 1.0}, 0.5)) == 0.0);
  CHECK(longest_zero_run(make_path({1.0, 2.0}, 0.5)) == 0.0);
}
