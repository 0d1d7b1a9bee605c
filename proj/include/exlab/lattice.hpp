#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "exlab/random.hpp"
#include "exlab/sde.hpp"
#include "exlab/stats.hpp"

namespace exlab {

using Coord = std::vector<int>;

// Closed box [-radius, radius]^dim, first coordinate slowest, so every
// half-space {j_1 >= i} is a contiguous suffix.
class Box {
 public:
  Box(int dim, int radius);

  int dim() const { return dim_; }
  int radius() const { return radius_; }
  std::size_t size() const { return size_; }
  int side() const { return 2 * radius_ + 1; }

  bool contains(const Coord& c) const;
  std::size_t index(const Coord& c) const;
  Coord coord(std::size_t idx) const;
  int first_coord(std::size_t idx) const { return static_cast<int>(idx / stride0_) - radius_; }
  // Index of the first site with first coordinate >= i (clamped).
  std::size_t halfspace_begin(int i) const;
  int linf(std::size_t idx) const;
  std::size_t origin() const { return size_ / 2; }
  // Depends only on coordinates, not on the box radius.
  std::uint64_t site_key(std::size_t idx) const;

 private:
  int dim_;
  int radius_;
  std::size_t size_;
  std::size_t stride0_;
};

struct JumpKernel {
  int dim = 1;
  std::vector<std::pair<Coord, double>> rates;
  bool symmetric = true;
  double dropped_rate = 0.0;

  static JumpKernel nearest_neighbour(int dim, double total_rate = 1.0);
  // Offsets below rel_cutoff * max rate are dropped and their total kept in dropped_rate.
  static JumpKernel from_rates(int dim, std::vector<std::pair<Coord, double>> rates, bool symmetric,
                               double rel_cutoff = 1e-12);

  JumpKernel adjoint() const;
  double total_rate() const;
  double rate(const Coord& offset) const;
  void validate() const;
};

// Generator of the kernel restricted to a box: sum over j in the box of
// q(i - j) (phi(j) - phi(i)).
class RestrictedGenerator {
 public:
  RestrictedGenerator(const JumpKernel& kernel, const Box& box);

  const Box& box() const { return box_; }
  void apply(std::span<const double> field, std::span<double> out) const;
  double out_rate(std::size_t i) const { return out_rate_[i]; }
  double inflow(std::size_t i, std::span<const double> field) const;
  double norm_bound() const { return norm_; }

 private:
  struct Edge {
    std::uint32_t j;
    double rate;
  };
  Box box_;
  std::vector<std::size_t> row_start_;
  std::vector<Edge> edges_;
  std::vector<double> out_rate_;
  double norm_ = 0.0;
};

std::vector<double> apply_generator(const JumpKernel& kernel, const Box& box, std::span<const double> field);

// e^{tL} x0 by the truncated exponential series, in substeps of norm <= 1/2.
// Each substep stops once a term is below tol times the running sum.
std::vector<double> heat_semigroup(const JumpKernel& kernel, const Box& box, std::span<const double> x0, double t,
                                   double tol = 1e-12);

class SemigroupStep {
 public:
  SemigroupStep(const RestrictedGenerator& gen, double t, double tol = 1e-12);
  void apply(std::vector<double>& x) const;

 private:
  RestrictedGenerator gen_;  // owned so copies stay valid
  double h_;
  int substeps_;
  double tol_;
};

enum class DriftMode { zero, linear, user_table };

struct DriftSpec {
  DriftMode mode = DriftMode::zero;
  double slope = 0.0;
  double lipschitz_L = 0.0;
  std::vector<std::pair<double, double>> table;  // (x, f(x)), x increasing > 0; f(0) = 0

  static DriftSpec zero();
  static DriftSpec linear(double a);
  static DriftSpec from_table(double lipschitz_L, std::vector<std::pair<double, double>> knots);

  double operator()(double x) const {
    if (mode == DriftMode::zero) return 0.0;
    if (mode == DriftMode::linear) return slope * x;
    return eval_table(x);
  }
  void validate() const;

 private:
  double eval_table(double x) const;
};

struct LatticeState {
  int dim = 1;
  int box_radius = 0;
  std::vector<double> values;
  double time = 0.0;
  std::uint64_t step = 0;

  Box box() const { return Box(dim, box_radius); }
  double total_mass() const;
  void validate() const;

  static LatticeState zeros(int dim, int radius);
  static LatticeState point_mass(int dim, int radius, const Coord& site, double mass);
};

enum class Transport { euler, exponential };

const char* transport_name(Transport t);
Transport parse_transport(std::string_view name);

struct LatticeOptions {
  Scheme noise_scheme = Scheme::near_zero_ladder;
  Transport transport = Transport::exponential;
};

// Caches everything that does not change between steps.
//
// euler: every site takes one Stepper step with drift
//   b_i(z) = inflow_i - out_i z + f(z), which for full_truncation is exactly
//   max(0, X + [L X + f(X)] dt + sigma(X) sqrt(dt) xi).
// exponential: X <- e^{dt L} X, then each site takes a Stepper step with drift f.
class SystemStepper {
 public:
  SystemStepper(const JumpKernel& kernel, const DriftSpec& f, const NoiseSpec& noise, double dt, int dim,
                int radius, LatticeOptions opt = {});

  // Site i of step k draws from stream.substream(k, site_key(i)).
  void step(LatticeState& state, const RngStream& stream) const;

  double dt() const { return dt_; }
  const RestrictedGenerator& generator() const { return gen_; }

 private:
  RestrictedGenerator gen_;
  DriftSpec f_;
  Stepper stepper_;
  LatticeOptions opt_;
  double dt_;
  std::optional<SemigroupStep> semigroup_;
};

LatticeState step_system(const LatticeState& state, const JumpKernel& kernel, const DriftSpec& f,
                         const NoiseSpec& noise, double dt, const RngStream& stream, LatticeOptions opt = {});

struct LatticeTrajectory {
  int dim = 1;
  int box_radius = 0;
  std::vector<double> times;
  std::vector<std::vector<double>> frames;
};

// Records the initial state and every `record_every`-th state.
LatticeTrajectory simulate_lattice(const LatticeState& x0, const SystemStepper& stepper, double horizon,
                                   std::size_t record_every, const RngStream& stream);

class MomentAccumulator {
 public:
  void add(const LatticeTrajectory& traj);

  const std::vector<double>& times() const { return times_; }
  const std::vector<std::vector<RunningStats>>& sites() const { return site_; }
  const std::vector<RunningStats>& total_mass() const { return total_; }
  int dim() const { return dim_; }
  int box_radius() const { return radius_; }

 private:
  int dim_ = 1;
  int radius_ = 0;
  std::vector<double> times_;
  std::vector<std::vector<RunningStats>> site_;
  std::vector<RunningStats> total_;
};

struct FirstMomentRow {
  double t = 0.0;
  std::size_t site = 0;
  double mean = 0.0;
  double se = 0.0;
  double heat = 0.0;   // P_t X_0(i)
  double bound = 0.0;  // e^{Lt} P_t X_0(i)
  bool bound_ok = true;
  bool equality_ok = true;
};

struct FirstMomentReport {
  double lipschitz_L = 0.0;
  bool equality_checked = false;
  std::vector<FirstMomentRow> rows;
  bool bound_pass() const;
  bool equality_pass() const;
};

// Equality is checked only when f is identically zero.
FirstMomentReport first_moment_check(const MomentAccumulator& acc, const JumpKernel& kernel, const DriftSpec& f,
                                     const LatticeState& x0, double z = 3.0, double abs_tol = 1e-12);

}  // namespace exlab
