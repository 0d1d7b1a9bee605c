#include "exlab/bvp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace exlab {

BvpProblem BvpProblem::constant(double p, int N, double left, double right) {
  BvpProblem b;
  b.N = N;
  b.left_value = left;
  b.right_value = right;
  b.p.assign(static_cast<std::size_t>(std::max(N, 0)) + 1, p);
  b.p.front() = 0.0;
  b.p.back() = 0.0;
  return b;
}

void BvpProblem::validate() const {
  if (N < 2) throw std::invalid_argument("bvp: N must be >= 2");
  if (p.size() != static_cast<std::size_t>(N) + 1) throw std::invalid_argument("bvp: p must have N+1 entries");
  for (int n = 1; n < N; ++n) {
    if (!(p[n] >= 0.0 && p[n] <= 1.0)) throw std::invalid_argument("bvp: p_" + std::to_string(n) + " outside [0,1]");
  }
}

double apply_discrete_op(const std::vector<double>& p, const std::vector<double>& g, int n) {
  if (n < 1 || static_cast<std::size_t>(n) + 1 >= g.size() || static_cast<std::size_t>(n) >= p.size())
    throw std::out_of_range("apply_discrete_op: n outside interior");
  return p[n] * g[n - 1] + (1.0 - p[n]) * g[n + 1] - g[n];
}

double max_residual(const std::vector<double>& p, const std::vector<double>& g) {
  double r = 0.0;
  for (int n = 1; n + 1 < static_cast<int>(g.size()); ++n) r = std::max(r, std::fabs(apply_discrete_op(p, g, n)));
  return r;
}

BvpSolution solve_bvp(const BvpProblem& problem) {
  problem.validate();
  const int N = problem.N;
  const auto& p = problem.p;
  // Interior unknowns g(1..N-1): p_n g(n-1) - g(n) + (1-p_n) g(n+1) = 0.
  // Elimination runs in long double; strongly biased p makes the system
  // badly conditioned.
  const int m = N - 1;
  std::vector<long double> c(m), d(m);
  long double prev_c = 0.0L, prev_d = 0.0L;
  for (int i = 0; i < m; ++i) {
    const int n = i + 1;
    const long double a = p[n];
    const long double upper = 1.0L - a;
    long double rhs = 0.0L;
    if (n == 1) rhs -= a * problem.left_value;
    if (n == N - 1) rhs -= upper * problem.right_value;
    const long double sub = n == 1 ? 0.0L : a;
    const long double pivot = -1.0L - sub * prev_c;
    if (std::fabs(pivot) < 1e-300L) throw SingularSystem("solve_bvp: zero pivot at n=" + std::to_string(n));
    c[i] = (n == N - 1 ? 0.0L : upper) / pivot;
    d[i] = (rhs - sub * prev_d) / pivot;
    prev_c = c[i];
    prev_d = d[i];
  }
  BvpSolution sol;
  sol.g.assign(N + 1, 0.0);
  sol.g[0] = problem.left_value;
  sol.g[N] = problem.right_value;
  long double next = 0.0L;
  for (int i = m - 1; i >= 0; --i) {
    next = d[i] - c[i] * (i == m - 1 ? 0.0L : next);
    sol.g[i + 1] = static_cast<double>(next);
  }
  sol.residual = max_residual(p, sol.g);
  return sol;
}

double q_supersolution(double K, int n) {
  if (!(K > 0.0) || n < 0) throw std::invalid_argument("q_supersolution: need K > 0, n >= 0");
  const double kn = K + n;
  // Written as one ratio so n = 0 gives exactly 1.
  return ((K + 1.0) * kn) / (K * (kn + 1.0)) * std::ldexp(1.0, -n);
}

double pbar(double zeta, int n, double c4, double c5) { return 1.0 / 3.0 + std::pow(zeta, c4) * std::exp(-c5 * n); }

double k_zeta(double zeta, double c4) { return std::pow(zeta, -c4 / 2.0) / 4.0; }

std::vector<double> pbar_sequence(double zeta, int N, double c4, double c5) {
  std::vector<double> p(N + 1, 0.0);
  for (int n = 1; n < N; ++n) p[n] = pbar(zeta, n, c4, c5);
  return p;
}

bool comparison_check(const std::vector<double>& sub, const std::vector<double>& super,
                      const std::vector<double>& p, double tol) {
  if (sub.size() != super.size() || sub.size() < 3 || p.size() < sub.size() - 1)
    throw std::invalid_argument("comparison_check: size mismatch");
  const int N = static_cast<int>(sub.size()) - 1;
  const double scale = std::max(1.0, *std::max_element(super.begin(), super.end()));
  for (int n = 1; n < N; ++n) {
    if (apply_discrete_op(p, sub, n) < -tol * scale)
      throw std::invalid_argument("comparison_check: sub is not a subsolution at n=" + std::to_string(n));
    if (apply_discrete_op(p, super, n) > tol * scale)
      throw std::invalid_argument("comparison_check: super is not a supersolution at n=" + std::to_string(n));
  }
  if (sub.front() > super.front() + tol || sub.back() > super.back() + tol)
    throw std::invalid_argument("comparison_check: boundary values out of order");
  for (int n = 0; n <= N; ++n) {
    if (sub[n] > super[n] + tol) return false;
  }
  return true;
}

}  // namespace exlab
