#pragma once

#include <stdexcept>
#include <vector>

namespace exlab {

// Coefficients use full indexing: p[n] for n = 0..N, with p[0] and p[N] unused.
struct BvpProblem {
  std::vector<double> p;
  int N = 2;
  double left_value = 1.0;
  double right_value = 0.0;

  static BvpProblem constant(double p, int N, double left, double right);
  void validate() const;
};

struct BvpSolution {
  std::vector<double> g;
  double residual = 0.0;
};

class SingularSystem : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// p_n g(n-1) + (1 - p_n) g(n+1) - g(n)
double apply_discrete_op(const std::vector<double>& p, const std::vector<double>& g, int n);

double max_residual(const std::vector<double>& p, const std::vector<double>& g);

BvpSolution solve_bvp(const BvpProblem& problem);

double q_supersolution(double K, int n);

// 1/3 + zeta^c4 e^{-c5 n}; c4, c5 are placeholders for unspecified constants.
double pbar(double zeta, int n, double c4, double c5);
double k_zeta(double zeta, double c4);
std::vector<double> pbar_sequence(double zeta, int N, double c4, double c5);

// Throws std::invalid_argument if sub or super fails its sign condition or
// the boundary values are out of order.
bool comparison_check(const std::vector<double>& sub, const std::vector<double>& super,
                      const std::vector<double>& p, double tol = 1e-12);

struct LimitResult {
  int N = 0;
  double g1 = 0.0;
  double change = 0.0;
  bool converged = false;
};

// Doubles N until g(1) moves by less than tol. p_of_n gives p_n.
template <class P>
LimitResult bvp_limit_g1(P&& p_of_n, double left, double right, int n_start, int n_max, double tol = 1e-10) {
  LimitResult out;
  double prev = 0.0;
  bool have_prev = false;
  for (int N = n_start; N <= n_max; N *= 2) {
    BvpProblem prob;
    prob.N = N;
    prob.left_value = left;
    prob.right_value = right;
    prob.p.assign(N + 1, 0.0);
    for (int n = 1; n < N; ++n) prob.p[n] = p_of_n(n);
    const double g1 = solve_bvp(prob).g[1];
    out.N = N;
    out.g1 = g1;
    if (have_prev) {
      out.change = std::abs(g1 - prev);
      if (out.change < tol) {
        out.converged = true;
        return out;
      }
    }
    prev = g1;
    have_prev = true;
  }
  return out;
}

}  // namespace exlab
