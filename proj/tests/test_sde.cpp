#include <catch_amalgamated.hpp>

#include <cmath>

#include "exlab/random.hpp"
#include "exlab/sde.hpp"
#include "exlab/stats.hpp"

using namespace exlab;

TEST_CASE("full truncation step examples") {
  const auto n03 = NoiseSpec::power(0.3);
  CHECK(step_full_truncation(0.0, 0.1, n03, 0.01, 5.0) == Catch::Approx(0.001).epsilon(1e-15));
  CHECK(step_full_truncation(0.0, 0.1, n03, 0.01, -5.0) == Catch::Approx(0.001).epsilon(1e-15));
  CHECK(step_full_truncation(1.0, 0.0, NoiseSpec::power(0.5), 0.04, -6.0) == 0.0);
  CHECK_THROWS(step_full_truncation(1.0, 0.0, n03, 0.0, 0.0));
  CHECK_THROWS(step_full_truncation(-1e-9, 0.0, n03, 0.1, 0.0));
}

TEST_CASE("full truncation increment is a martingale away from 0") {
  const auto noise = NoiseSpec::power(0.3);
  auto s = split_stream(1, {"ft-mean"});
  RunningStats st;
  for (int k = 0; k < 1000000; ++k) st.add(step_full_truncation(1.0, 0.0, noise, 1e-4, s.normal()) - 1.0);
  CHECK(std::fabs(st.mean()) < 3.0 * st.se());
}

TEST_CASE("noise spec invariants") {
  CHECK_NOTHROW(NoiseSpec::power(0.25).validate());
  auto bad = NoiseSpec::power(0.25);
  bad.theta = 0.5;  // x^0.25 > x^0.5 + x near 0
  CHECK_THROWS(bad.validate());
  const auto t = NoiseSpec::from_table(0.25, 0.25, 2.0, {{0.01, std::pow(0.01, 0.25)}, {1.0, 1.0}, {4.0, 1.5}});
  CHECK(t(0.0) == 0.0);
  CHECK(t(1e-4) == Catch::Approx(std::pow(1e-4, 0.25)));
  CHECK(t(2.5) == Catch::Approx(1.25));
  CHECK(t(8.0) == Catch::Approx(3.0));
  CHECK_THROWS(NoiseSpec::from_table(0.25, 0.25, 1.0, {{1.0, 1.0}, {0.5, 1.0}}));
}

namespace {

// Trapezoid on a fine grid of 2 int G(x,y) / sigma(y)^2 dy.
double exit_mean_oracle(double g, double a, double c, double x) {
  const int n = 400000;
  double sum = 0.0;
  const double h = (c - a) / n;
  for (int i = 1; i < n; ++i) {
    const double y = a + i * h;
    const double green = (std::min(x, y) - a) * (c - std::max(x, y)) / (c - a);
    sum += 2.0 * green * std::pow(y, -2.0 * g);
  }
  return sum * h;
}

}  // namespace

TEST_CASE("mean exit time closed form against quadrature") {
  for (double g : {0.25, 0.3, 0.5, 0.7}) {
    const auto n = NoiseSpec::power(g);
    CHECK(n.mean_exit_time(0.5, 2.0, 1.0) == Catch::Approx(exit_mean_oracle(g, 0.5, 2.0, 1.0)).epsilon(1e-6));
    CHECK(n.mean_exit_time(0.0, 2.0, 1.0) == Catch::Approx(exit_mean_oracle(g, 0.0, 2.0, 1.0)).epsilon(2e-3));
  }
  // gamma = 0: Brownian motion, (x-a)(c-x).
  CHECK(NoiseSpec::power(1e-13).mean_exit_time(0.5, 2.0, 1.0) == Catch::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("simulate_path degenerate cases") {
  auto s = split_stream(3, {});
  SdeParams zero{0.0, NoiseSpec::power(0.3), 0.0};
  for (auto scheme : {Scheme::full_truncation, Scheme::near_zero_ladder}) {
    const auto p = simulate_path(zero, 1.0, 0.01, s, scheme);
    REQUIRE(p.size() == 101);
    for (double v : p.values) CHECK(v == 0.0);
  }
  SdeParams ramp{0.1, NoiseSpec::zero(0.3), 0.0};
  const auto p = simulate_path(ramp, 1.0, 0.1, s);
  REQUIRE(p.size() == 11);
  for (std::size_t k = 0; k < p.size(); ++k) CHECK(p.values[k] == Catch::Approx(0.01 * k).margin(1e-15));
  CHECK_THROWS(simulate_path(ramp, 0.05, 0.1, s));
}

TEST_CASE("simulate_path is deterministic and non-negative") {
  SdeParams prm{0.05, NoiseSpec::power(0.25), 0.01};
  for (auto scheme : {Scheme::full_truncation, Scheme::near_zero_ladder}) {
    auto s1 = split_stream(9, {1});
    auto s2 = split_stream(9, {1});
    const auto a = simulate_path(prm, 1.0, 1e-3, s1, scheme);
    const auto b = simulate_path(prm, 1.0, 1e-3, s2, scheme);
    CHECK(a.values == b.values);
    CHECK(a.touched == b.touched);
    for (double v : a.values) CHECK(v >= 0.0);
  }
}

TEST_CASE("ensemble mean of Z_1 is delta") {
  // E[Z_t] = delta t; checked with the default scheme.
  SdeParams prm{0.1, NoiseSpec::power(0.3), 0.0};
  RunningStats st;
  for (std::uint64_t r = 0; r < 100000; ++r) {
    auto s = split_stream(77, {r});
    st.add(simulate_path(prm, 1.0, 1e-2, s).values.back());
  }
  CHECK(std::fabs(st.mean() - 0.1) < 3.0 * st.se());
}

TEST_CASE("full truncation overshoots the mean near 0") {
  // Known defect of the specified Euler scheme for gamma < 1/2.
  SdeParams prm{0.1, NoiseSpec::power(0.3), 0.0};
  RunningStats st;
  for (std::uint64_t r = 0; r < 2000; ++r) {
    auto s = split_stream(78, {r});
    st.add(simulate_path(prm, 1.0, 1e-3, s, Scheme::full_truncation).values.back());
  }
  CHECK(st.mean() > 0.1 + 5.0 * st.se());
}

TEST_CASE("first_hitting_time") {
  Path1D c{0.0, 0.1, {0.3, 0.3, 0.3}, {}};
  CHECK(first_hitting_time(c, 0.3, 0).value() == 0.0);
  Path1D up{0.0, 1.0, {0.0, 1.0}, {}};
  CHECK(first_hitting_time(up, 0.5, 0).value() == Catch::Approx(0.5));
  CHECK_FALSE(first_hitting_time(up, 2.0, 0).has_value());
  Path1D down{2.0, 0.5, {1.0, 0.8, 0.2, 0.6}, {}};
  CHECK(first_hitting_time(down, 0.5, 0).value() == Catch::Approx(2.0 + 0.5 + 0.5 * 0.5));
  CHECK(first_hitting_time(down, 0.5, 2).value() == Catch::Approx(3.0 + 0.5 * 0.75));
  Path1D brush{0.0, 1.0, {0.2, 0.1, 0.3}, {0, 1, 0}};
  CHECK(first_hitting_time(brush, 0.0, 0).value() == 1.0);
  CHECK_THROWS(first_hitting_time(up, 0.5, 5));
}

TEST_CASE("occupation_time") {
  Path1D zero{0.0, 0.1, std::vector<double>(11, 0.0), {}};
  CHECK(occupation_time(zero, 0.0, 1.0) == Catch::Approx(1.0));
  Path1D ramp{0.0, 0.25, {0.0, 0.25, 0.5, 0.75, 1.0}, {}};
  CHECK(occupation_time(ramp, 0.5, 1.0) == Catch::Approx(0.5));
  CHECK(occupation_time(ramp, 0.6, 0.5) == Catch::Approx(0.5));
  Path1D vee{0.0, 1.0, {1.0, 0.0, 1.0}, {}};
  CHECK(occupation_time(vee, 0.25, 2.0) == Catch::Approx(0.5));
  CHECK_THROWS(occupation_time(ramp, 0.1, 2.0));
}
