#include <catch_amalgamated.hpp>

#include <cmath>

#include "exlab/random.hpp"
#include "exlab/stats.hpp"

using namespace exlab;

TEST_CASE("running stats") {
  RunningStats s;
  for (double x : {1.0, 2.0, 3.0, 4.0}) s.add(x);
  CHECK(s.mean() == 2.5);
  CHECK(s.variance() == Catch::Approx(5.0 / 3.0));
  CHECK(s.se() == Catch::Approx(std::sqrt(5.0 / 12.0)));
}

TEST_CASE("wilson interval") {
  // k=30, n=100, z=1.96: [0.21895, 0.39585].
  const auto w = wilson_interval(30, 100, 1.96);
  CHECK(w.lo == Catch::Approx(0.21895).margin(2e-4));
  CHECK(w.hi == Catch::Approx(0.39585).margin(2e-4));
  const auto z = wilson_interval(0, 50, 3.0);
  CHECK(z.lo == 0.0);
  CHECK(z.hi > 0.0);
}

TEST_CASE("kolmogorov distribution") {
  // Q(1.36) ~ 0.049, Q(1.63) ~ 0.0098.
  CHECK(kolmogorov_q(1.36) == Catch::Approx(0.0494).margin(5e-4));
  CHECK(kolmogorov_q(1.63) == Catch::Approx(0.00977).margin(2e-4));
  CHECK(kolmogorov_q(0.0) == 1.0);
}

TEST_CASE("two sample KS separates shifted samples") {
  auto s = split_stream(3, {});
  std::vector<double> a(2000), b(2000), c(2000);
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = s.normal();
    b[i] = s.normal();
    c[i] = s.normal() + 0.3;
  }
  CHECK(ks_two_sample(a, b).p_value > 0.001);
  CHECK(ks_two_sample(a, c).p_value < 1e-6);
}

TEST_CASE("fit_scaling exact power law") {
  std::vector<std::pair<double, double>> pts;
  for (double x : {0.5, 1.0, 2.0, 4.0, 8.0}) pts.emplace_back(x, x * x);
  const auto f = fit_scaling(pts);
  CHECK(std::fabs(f.exponent - 2.0) < 1e-12);
  CHECK(std::fabs(f.r2 - 1.0) < 1e-12);
  CHECK(std::fabs(f.intercept) < 1e-12);
}

TEST_CASE("fit_scaling with one percent noise") {
  auto s = split_stream(11, {});
  std::vector<std::pair<double, double>> pts;
  for (int k = 0; k < 20; ++k) {
    const double x = std::pow(2.0, -k / 2.0);
    pts.emplace_back(x, 5.0 * std::pow(x, 1.4) * (1.0 + 0.01 * s.normal()));
  }
  CHECK(std::fabs(fit_scaling(pts).exponent - 1.4) < 0.05);
}

TEST_CASE("fit_scaling rejects bad input") {
  CHECK_THROWS(fit_scaling({{1, 1}, {2, 2}}));
  CHECK_THROWS(fit_scaling({{1, 1}, {2, 0}, {3, 3}}));
}

TEST_CASE("quantile") {
  CHECK(quantile({3, 1, 2}, 0.5) == 2.0);
  CHECK(quantile({1, 2}, 0.5) == 1.5);
}
