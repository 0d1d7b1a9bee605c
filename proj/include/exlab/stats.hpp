#pragma once

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

namespace exlab {

// Welford accumulator.
class RunningStats {
 public:
  void add(double x);
  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const;  // unbiased
  double sd() const;
  double se() const;

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double x) const { return lo <= x && x <= hi; }
  double width() const { return hi - lo; }
};

struct Proportion {
  std::size_t successes = 0;
  std::size_t trials = 0;
  double estimate() const;
  double se() const;  // sqrt(p(1-p)/n)
  Interval wilson(double z) const;
};

Interval wilson_interval(std::size_t k, std::size_t n, double z);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

// Survival function of the Kolmogorov distribution.
double kolmogorov_q(double lambda);

KsResult ks_test(std::vector<double> sample, const std::function<double(double)>& cdf);
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

struct ScalingFit {
  double exponent = 0.0;
  double intercept = 0.0;  // natural log of the prefactor
  double r2 = 0.0;
};

// Least squares of log y on log x.
ScalingFit fit_scaling(const std::vector<std::pair<double, double>>& points);

double quantile(std::vector<double> v, double q);

}  // namespace exlab
