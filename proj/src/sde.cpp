#include "exlab/sde.hpp"

#include <array>
#include <limits>
#include <stdexcept>
#include <string>

namespace exlab {

namespace {

// Exit mean for sigma(y) = y^g from (a, c) started at x: 2 * int G(x,y) y^{-2g} dy.
double power_exit_mean(double g, double a, double c, double x) {
  const double e1 = 1.0 - 2.0 * g;
  auto P = [&](double y) { return std::fabs(e1) < 1e-12 ? std::log(y) : std::pow(y, e1) / e1; };
  auto Q = [&](double y) { return std::pow(y, 2.0 - 2.0 * g) / (2.0 - 2.0 * g); };
  const double left = (Q(x) - Q(a)) - (a > 0.0 ? a * (P(x) - P(a)) : 0.0);
  const double right = c * (P(c) - P(x)) - (Q(c) - Q(x));
  return 2.0 / (c - a) * ((c - x) * left + (x - a) * right);
}

// 16-point Gauss-Legendre on [lo, hi].
template <class F>
double gauss_legendre(F&& f, double lo, double hi) {
  static constexpr std::array<double, 8> x = {0.0950125098376374, 0.2816035507792589, 0.4580167776572274,
                                              0.6178762444026438, 0.7554044083550030, 0.8656312023878318,
                                              0.9445750230732326, 0.9894009349916499};
  static constexpr std::array<double, 8> w = {0.1894506104550685, 0.1826034150449236, 0.1691565193950025,
                                              0.1495959888165767, 0.1246289712555339, 0.0951585116824928,
                                              0.0622535239386479, 0.0271524594117541};
  const double mid = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) sum += w[i] * (f(mid - half * x[i]) + f(mid + half * x[i]));
  return sum * half;
}

}  // namespace

NoiseSpec NoiseSpec::power(double gamma) {
  NoiseSpec n;
  n.gamma = gamma;
  n.theta = gamma;
  n.c_growth = 1.0;
  n.mode = NoiseMode::pure_power;
  return n;
}

NoiseSpec NoiseSpec::zero(double gamma) {
  NoiseSpec n = power(gamma);
  n.mode = NoiseMode::degenerate;
  return n;
}

NoiseSpec NoiseSpec::from_table(double gamma, double theta, double c_growth,
                                std::vector<std::pair<double, double>> knots) {
  NoiseSpec n;
  n.gamma = gamma;
  n.theta = theta;
  n.c_growth = c_growth;
  n.mode = NoiseMode::user_table;
  n.table = std::move(knots);
  n.validate();
  return n;
}

double NoiseSpec::eval_slow(double x) const {
  if (x <= 0.0 || mode == NoiseMode::degenerate) return 0.0;
  if (mode == NoiseMode::pure_power) return std::pow(x, gamma);
  const auto& [x0, s0] = table.front();
  if (x <= x0) return s0 * std::pow(x / x0, gamma);
  const auto& [xn, sn] = table.back();
  if (x >= xn) return sn * x / xn;
  auto it = std::lower_bound(table.begin(), table.end(), x,
                             [](const std::pair<double, double>& k, double v) { return k.first < v; });
  const auto& [x2, s2] = *it;
  const auto& [x1, s1] = *(it - 1);
  return s1 + (s2 - s1) * (x - x1) / (x2 - x1);
}

void NoiseSpec::validate() const {
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("noise: gamma must lie in (0,1)");
  if (!(theta > 0.0 && theta < 1.0)) throw std::invalid_argument("noise: theta must lie in (0,1)");
  if (!(c_growth >= 1.0)) throw std::invalid_argument("noise: c_growth must be >= 1");
  if (mode == NoiseMode::degenerate) return;
  if (mode == NoiseMode::user_table) {
    if (table.empty()) throw std::invalid_argument("noise: user_table needs knots");
    for (std::size_t i = 0; i < table.size(); ++i) {
      if (!(table[i].first > 0.0) || !(table[i].second > 0.0))
        throw std::invalid_argument("noise: table knots must be positive");
      if (i > 0 && !(table[i].first > table[i - 1].first))
        throw std::invalid_argument("noise: table x must increase");
    }
  }
  if ((*this)(0.0) != 0.0) throw std::invalid_argument("noise: sigma(0) must be 0");
  for (int k = -80; k <= 30; ++k) {
    const double x = std::pow(10.0, k / 10.0);
    const double s = (*this)(x);
    if (!(s > 0.0)) throw std::invalid_argument("noise: sigma must be positive on (0,inf)");
    if (s > c_growth * (std::pow(x, theta) + x) * (1.0 + 1e-12))
      throw std::invalid_argument("noise: growth bound sigma(x) <= C(x^theta + x) violated at x=" +
                                  std::to_string(x));
  }
}

double NoiseSpec::small_x_prefactor() const {
  if (mode == NoiseMode::user_table) return table.front().second / std::pow(table.front().first, gamma);
  return 1.0;
}

double NoiseSpec::mean_exit_time(double a, double c, double x) const {
  if (!(a <= x && x <= c && a < c && a >= 0.0)) throw std::invalid_argument("mean_exit_time: need 0 <= a <= x <= c");
  if (mode == NoiseMode::degenerate) return std::numeric_limits<double>::infinity();
  if (mode == NoiseMode::pure_power) return power_exit_mean(gamma, a, c, x);
  const double amp = small_x_prefactor();
  if (c <= table.front().first) return power_exit_mean(gamma, a, c, x) / (amp * amp);
  auto inv_var = [&](double y) {
    const double s = (*this)(y);
    return 1.0 / (s * s);
  };
  const double left = gauss_legendre([&](double y) { return (y - a) * inv_var(y); }, a, x);
  const double right = gauss_legendre([&](double y) { return (c - y) * inv_var(y); }, x, c);
  return 2.0 / (c - a) * ((c - x) * left + (x - a) * right);
}

const char* scheme_name(Scheme s) {
  return s == Scheme::full_truncation ? "full_truncation" : "near_zero_ladder";
}

Scheme parse_scheme(std::string_view name) {
  if (name == "full_truncation") return Scheme::full_truncation;
  if (name == "near_zero_ladder") return Scheme::near_zero_ladder;
  throw std::invalid_argument("unknown scheme: " + std::string(name));
}

double step_full_truncation(double z, double delta, const NoiseSpec& noise, double dt, double xi) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_full_truncation: dt must be positive");
  if (!(z >= 0.0)) throw std::invalid_argument("step_full_truncation: z must be non-negative");
  return std::max(0.0, z + delta * dt + noise(z) * std::sqrt(dt) * xi);
}

Stepper::Stepper(const NoiseSpec& noise, double dt, Scheme scheme, double floor_ratio, double resolve_k)
    : noise_(noise), dt_(dt), scheme_(scheme) {
  if (!(dt > 0.0)) throw std::invalid_argument("Stepper: dt must be positive");
  if (!(floor_ratio > 0.0) || !(resolve_k > 0.0)) throw std::invalid_argument("Stepper: bad tuning");
  two_minus_2g_ = 2.0 - 2.0 * noise.gamma;
  resolve_k2_ = resolve_k * resolve_k;
  if (noise.mode != NoiseMode::degenerate) {
    const double amp = noise.small_x_prefactor();
    floor_ = floor_ratio * std::pow(amp * amp * dt, 1.0 / two_minus_2g_);
    k_mid_ = power_exit_mean(noise.gamma, 0.5, 2.0, 1.0);
    k_low_ = power_exit_mean(noise.gamma, 0.0, 2.0, 1.0);
  }
}

double Stepper::exit_mean(bool low, double z) const {
  if (noise_.mode == NoiseMode::pure_power) return (low ? k_low_ : k_mid_) * std::pow(z, two_minus_2g_);
  return noise_.mean_exit_time(low ? 0.0 : 0.5 * z, 2.0 * z, z);
}

Path1D simulate_path(const SdeParams& params, double horizon, double dt, RngStream& stream, Scheme scheme) {
  if (!(dt > 0.0) || !(horizon >= dt)) throw std::invalid_argument("simulate_path: need horizon >= dt > 0");
  if (!(params.delta >= 0.0) || !(params.z0 >= 0.0)) throw std::invalid_argument("simulate_path: bad params");
  const auto steps = static_cast<std::size_t>(std::floor(horizon / dt + 1e-9));
  Path1D path;
  path.dt = dt;
  path.values.reserve(steps + 1);
  path.touched.reserve(steps + 1);
  path.values.push_back(params.z0);
  path.touched.push_back(params.z0 == 0.0);
  const Stepper stepper(params.noise, dt, scheme);
  const ConstantDrift drift{params.delta};
  double z = params.z0;
  for (std::size_t k = 0; k < steps; ++k) {
    const auto res = stepper.advance(z, drift, stream);
    z = res.value;
    path.values.push_back(z);
    path.touched.push_back(res.touched_zero);
  }
  return path;
}

std::optional<double> first_hitting_time(const Path1D& path, double level, std::size_t start_index) {
  if (start_index >= path.size()) throw std::out_of_range("first_hitting_time: start_index outside path");
  const auto& v = path.values;
  if (v[start_index] == level) return path.time(start_index);
  for (std::size_t k = start_index; k + 1 < v.size(); ++k) {
    const double a = v[k] - level;
    const double b = v[k + 1] - level;
    if ((a < 0.0 && b >= 0.0) || (a > 0.0 && b <= 0.0)) return path.time(k) + path.dt * a / (a - b);
    if (level == 0.0 && path.at_zero(k + 1)) return path.time(k + 1);
  }
  return std::nullopt;
}

double occupation_time(const Path1D& path, double eps, double horizon) {
  if (!(eps >= 0.0)) throw std::invalid_argument("occupation_time: eps must be non-negative");
  if (horizon > path.duration() + 1e-12 * std::max(1.0, horizon))
    throw std::invalid_argument("occupation_time: horizon beyond path");
  double total = 0.0;
  const auto& v = path.values;
  for (std::size_t k = 0; k + 1 < v.size(); ++k) {
    const double s0 = static_cast<double>(k) * path.dt;
    if (s0 >= horizon) break;
    const double frac_end = std::min(1.0, (horizon - s0) / path.dt);
    // Piece of the segment [0, frac_end] (in units of dt) where the line is <= eps.
    const double a = v[k], b = v[k + 1];
    double lo = 0.0, hi = frac_end;
    if (a == b) {
      if (a > eps) continue;
    } else {
      const double cross = (eps - a) / (b - a);
      if (b > a) hi = std::min(hi, cross);
      else lo = std::max(lo, cross);
    }
    if (hi > lo) total += (hi - lo) * path.dt;
  }
  return total;
}

}  // namespace exlab
