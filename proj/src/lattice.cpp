#include "exlab/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

namespace exlab {

Box::Box(int dim, int radius) : dim_(dim), radius_(radius) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("Box: dim must be 1, 2 or 3");
  if (radius < 0) throw std::invalid_argument("Box: radius must be >= 0");
  const std::size_t s = static_cast<std::size_t>(side());
  size_ = 1;
  for (int k = 0; k < dim; ++k) size_ *= s;
  stride0_ = size_ / s;
}

bool Box::contains(const Coord& c) const {
  if (static_cast<int>(c.size()) != dim_) return false;
  for (int v : c)
    if (v < -radius_ || v > radius_) return false;
  return true;
}

std::size_t Box::index(const Coord& c) const {
  if (!contains(c)) throw std::out_of_range("Box::index: site outside the box");
  std::size_t idx = 0;
  for (int v : c) idx = idx * static_cast<std::size_t>(side()) + static_cast<std::size_t>(v + radius_);
  return idx;
}

Coord Box::coord(std::size_t idx) const {
  Coord c(static_cast<std::size_t>(dim_));
  const std::size_t s = static_cast<std::size_t>(side());
  for (int k = dim_ - 1; k >= 0; --k) {
    c[static_cast<std::size_t>(k)] = static_cast<int>(idx % s) - radius_;
    idx /= s;
  }
  return c;
}

std::size_t Box::halfspace_begin(int i) const {
  if (i <= -radius_) return 0;
  if (i > radius_) return size_;
  return static_cast<std::size_t>(i + radius_) * stride0_;
}

int Box::linf(std::size_t idx) const {
  int m = 0;
  for (int v : coord(idx)) m = std::max(m, std::abs(v));
  return m;
}

std::uint64_t Box::site_key(std::size_t idx) const {
  std::uint64_t h = 0x5a17e5eedULL;
  for (int v : coord(idx)) {
    const auto zz = static_cast<std::uint64_t>((static_cast<std::int64_t>(v) << 1) ^ (static_cast<std::int64_t>(v) >> 63));
    h = splitmix64(h ^ zz);
  }
  return h;
}

JumpKernel JumpKernel::nearest_neighbour(int dim, double total_rate) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("nearest_neighbour: dim must be 1, 2 or 3");
  if (!(total_rate > 0.0)) throw std::invalid_argument("nearest_neighbour: rate must be positive");
  JumpKernel k;
  k.dim = dim;
  const double r = total_rate / (2.0 * dim);
  for (int a = 0; a < dim; ++a) {
    for (int s : {-1, 1}) {
      Coord off(static_cast<std::size_t>(dim), 0);
      off[static_cast<std::size_t>(a)] = s;
      k.rates.emplace_back(off, r);
    }
  }
  return k;
}

JumpKernel JumpKernel::from_rates(int dim, std::vector<std::pair<Coord, double>> rates, bool symmetric,
                                  double rel_cutoff) {
  JumpKernel k;
  k.dim = dim;
  k.symmetric = symmetric;
  double mx = 0.0;
  for (const auto& [off, r] : rates) {
    if (!(r >= 0.0) || !std::isfinite(r)) throw std::invalid_argument("JumpKernel: rates must be finite and >= 0");
    mx = std::max(mx, r);
  }
  std::map<Coord, double> merged;
  for (auto& [off, r] : rates) {
    if (static_cast<int>(off.size()) != dim) throw std::invalid_argument("JumpKernel: offset has wrong dimension");
    if (r < rel_cutoff * mx) {
      k.dropped_rate += r;
      continue;
    }
    merged[off] += r;
  }
  for (auto& [off, r] : merged) k.rates.emplace_back(off, r);
  k.validate();
  return k;
}

JumpKernel JumpKernel::adjoint() const {
  JumpKernel a = *this;
  for (auto& [off, r] : a.rates)
    for (int& v : off) v = -v;
  return a;
}

double JumpKernel::total_rate() const {
  double s = 0.0;
  for (const auto& e : rates) s += e.second;
  return s;
}

double JumpKernel::rate(const Coord& offset) const {
  for (const auto& [off, r] : rates)
    if (off == offset) return r;
  return 0.0;
}

void JumpKernel::validate() const {
  if (dim < 1 || dim > 3) throw std::invalid_argument("JumpKernel: dim must be 1, 2 or 3");
  if (rates.empty()) throw std::invalid_argument("JumpKernel: no rates");
  double total = 0.0;
  for (const auto& [off, r] : rates) {
    if (static_cast<int>(off.size()) != dim) throw std::invalid_argument("JumpKernel: offset has wrong dimension");
    if (!(r >= 0.0) || !std::isfinite(r)) throw std::invalid_argument("JumpKernel: rates must be finite and >= 0");
    if (r > 0.0 && std::all_of(off.begin(), off.end(), [](int v) { return v == 0; }))
      throw std::invalid_argument("JumpKernel: q(0) must be 0");
    total += r;
  }
  if (!(total > 0.0) || !std::isfinite(total)) throw std::invalid_argument("JumpKernel: total rate must be finite and positive");
  if (symmetric) {
    for (const auto& [off, r] : rates) {
      Coord neg = off;
      for (int& v : neg) v = -v;
      if (std::abs(rate(neg) - r) > 1e-14 * std::max(1.0, r))
        throw std::invalid_argument("JumpKernel: declared symmetric but q(k) != q(-k)");
    }
  }
}

RestrictedGenerator::RestrictedGenerator(const JumpKernel& kernel, const Box& box) : box_(box) {
  kernel.validate();
  if (kernel.dim != box.dim()) throw std::invalid_argument("RestrictedGenerator: kernel and box dimensions differ");
  const std::size_t n = box.size();
  row_start_.assign(n + 1, 0);
  out_rate_.assign(n, 0.0);
  Coord j(static_cast<std::size_t>(box.dim()));
  for (std::size_t i = 0; i < n; ++i) {
    row_start_[i] = edges_.size();
    const Coord ci = box.coord(i);
    for (const auto& [off, r] : kernel.rates) {
      if (r == 0.0) continue;
      // q(i - j) with offset = i - j, so j = i - offset.
      for (std::size_t a = 0; a < j.size(); ++a) j[a] = ci[a] - off[a];
      if (!box.contains(j)) continue;
      edges_.push_back({static_cast<std::uint32_t>(box.index(j)), r});
      out_rate_[i] += r;
    }
    norm_ = std::max(norm_, 2.0 * out_rate_[i]);
  }
  row_start_[n] = edges_.size();
}

void RestrictedGenerator::apply(std::span<const double> field, std::span<double> out) const {
  const std::size_t n = box_.size();
  if (field.size() != n || out.size() != n) throw std::invalid_argument("RestrictedGenerator: field size mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    const double fi = field[i];
    for (std::size_t e = row_start_[i]; e < row_start_[i + 1]; ++e) s += edges_[e].rate * (field[edges_[e].j] - fi);
    out[i] = s;
  }
}

double RestrictedGenerator::inflow(std::size_t i, std::span<const double> field) const {
  double s = 0.0;
  for (std::size_t e = row_start_[i]; e < row_start_[i + 1]; ++e) s += edges_[e].rate * field[edges_[e].j];
  return s;
}

std::vector<double> apply_generator(const JumpKernel& kernel, const Box& box, std::span<const double> field) {
  RestrictedGenerator gen(kernel, box);
  std::vector<double> out(box.size());
  gen.apply(field, out);
  return out;
}

SemigroupStep::SemigroupStep(const RestrictedGenerator& gen, double t, double tol) : gen_(gen), tol_(tol) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("heat_semigroup: t must be finite and >= 0");
  if (!(tol > 0.0)) throw std::invalid_argument("heat_semigroup: tol must be positive");
  const double a = t * gen.norm_bound();
  substeps_ = std::max(1, static_cast<int>(std::ceil(a / 0.5)));
  if (substeps_ > 100000000) throw std::invalid_argument("heat_semigroup: t * |L| too large");
  h_ = t / substeps_;
}

void SemigroupStep::apply(std::vector<double>& x) const {
  if (x.size() != gen_.box().size()) throw std::invalid_argument("heat_semigroup: field size mismatch");
  if (h_ == 0.0) return;
  constexpr int kMaxTerms = 200;
  std::vector<double> term, next(x.size());
  for (int s = 0; s < substeps_; ++s) {
    term = x;
    bool converged = false;
    for (int k = 1; k <= kMaxTerms; ++k) {
      gen_.apply(term, next);
      double tn = 0.0, sn = 0.0;
      bool finite = true;
      for (std::size_t i = 0; i < x.size(); ++i) {
        term[i] = next[i] * h_ / k;
        x[i] += term[i];
        finite = finite && std::isfinite(x[i]);
        tn = std::max(tn, std::abs(term[i]));
        sn = std::max(sn, std::abs(x[i]));
      }
      if (!finite) throw std::runtime_error("heat_semigroup: series diverged");
      if (tn <= tol_ * sn || sn == 0.0) {
        converged = true;
        break;
      }
    }
    if (!converged) throw std::runtime_error("heat_semigroup: series did not converge");
  }
}

std::vector<double> heat_semigroup(const JumpKernel& kernel, const Box& box, std::span<const double> x0, double t,
                                   double tol) {
  if (x0.size() != box.size()) throw std::invalid_argument("heat_semigroup: field size mismatch");
  RestrictedGenerator gen(kernel, box);
  SemigroupStep step(gen, t, tol);
  std::vector<double> x(x0.begin(), x0.end());
  step.apply(x);
  return x;
}

DriftSpec DriftSpec::zero() { return {}; }

DriftSpec DriftSpec::linear(double a) {
  DriftSpec f;
  f.mode = DriftMode::linear;
  f.slope = a;
  f.lipschitz_L = std::abs(a);
  return f;
}

DriftSpec DriftSpec::from_table(double lipschitz_L, std::vector<std::pair<double, double>> knots) {
  DriftSpec f;
  f.mode = DriftMode::user_table;
  f.lipschitz_L = lipschitz_L;
  f.table = std::move(knots);
  f.validate();
  return f;
}

double DriftSpec::eval_table(double x) const {
  if (x <= 0.0) return 0.0;
  double x0 = 0.0, y0 = 0.0;
  for (const auto& [xk, yk] : table) {
    if (x <= xk) return y0 + (yk - y0) * (x - x0) / (xk - x0);
    x0 = xk;
    y0 = yk;
  }
  // Beyond the last knot: continue with the last slope.
  const std::size_t m = table.size();
  const double xp = m >= 2 ? table[m - 2].first : 0.0;
  const double yp = m >= 2 ? table[m - 2].second : 0.0;
  return y0 + (y0 - yp) / (x0 - xp) * (x - x0);
}

void DriftSpec::validate() const {
  if (!(lipschitz_L >= 0.0) || !std::isfinite(lipschitz_L)) throw std::invalid_argument("DriftSpec: L must be finite and >= 0");
  if (mode == DriftMode::linear && std::abs(slope) > lipschitz_L * (1 + 1e-12))
    throw std::invalid_argument("DriftSpec: |a| exceeds the Lipschitz constant");
  if (mode != DriftMode::user_table) return;
  if (table.empty()) throw std::invalid_argument("DriftSpec: empty table");
  double x0 = 0.0, y0 = 0.0;
  for (const auto& [x, y] : table) {
    if (!(x > x0) || !std::isfinite(y)) throw std::invalid_argument("DriftSpec: knots must be increasing and positive");
    if (std::abs(y - y0) > lipschitz_L * (x - x0) * (1 + 1e-12))
      throw std::invalid_argument("DriftSpec: table violates the Lipschitz constant");
    x0 = x;
    y0 = y;
  }
}

double LatticeState::total_mass() const {
  double s = 0.0;
  for (double v : values) s += v;
  return s;
}

void LatticeState::validate() const {
  const Box b(dim, box_radius);
  if (values.size() != b.size()) throw std::invalid_argument("LatticeState: value count does not match the box");
  for (double v : values)
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("LatticeState: values must be finite and >= 0");
}

LatticeState LatticeState::zeros(int dim, int radius) {
  LatticeState s;
  s.dim = dim;
  s.box_radius = radius;
  s.values.assign(Box(dim, radius).size(), 0.0);
  return s;
}

LatticeState LatticeState::point_mass(int dim, int radius, const Coord& site, double mass) {
  if (!(mass >= 0.0)) throw std::invalid_argument("point_mass: mass must be >= 0");
  LatticeState s = zeros(dim, radius);
  s.values[s.box().index(site)] = mass;
  return s;
}

const char* transport_name(Transport t) { return t == Transport::euler ? "euler" : "exponential"; }

Transport parse_transport(std::string_view name) {
  if (name == "euler") return Transport::euler;
  if (name == "exponential") return Transport::exponential;
  throw std::invalid_argument("unknown transport: " + std::string(name));
}

SystemStepper::SystemStepper(const JumpKernel& kernel, const DriftSpec& f, const NoiseSpec& noise, double dt,
                             int dim, int radius, LatticeOptions opt)
    : gen_(kernel, Box(dim, radius)), f_(f), stepper_(noise, dt, opt.noise_scheme), opt_(opt), dt_(dt) {
  f.validate();
  noise.validate();
  if (opt.transport == Transport::exponential) semigroup_.emplace(gen_, dt);
}

void SystemStepper::step(LatticeState& state, const RngStream& stream) const {
  const Box& box = gen_.box();
  if (state.dim != box.dim() || state.box_radius != box.radius() || state.values.size() != box.size())
    throw std::invalid_argument("SystemStepper: state does not match the box");
  const std::size_t n = box.size();
  std::vector<double> scratch = state.values;
  if (opt_.transport == Transport::exponential) {
    semigroup_->apply(scratch);
    for (std::size_t i = 0; i < n; ++i) {
      RngStream rng = stream.substream(state.step, box.site_key(i));
      const double z = std::max(0.0, scratch[i]);
      state.values[i] = stepper_.advance(z, f_, rng).value;
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      RngStream rng = stream.substream(state.step, box.site_key(i));
      const double in = gen_.inflow(i, scratch);
      const double out = gen_.out_rate(i);
      auto drift = [&](double z) { return in - out * z + f_(z); };
      state.values[i] = stepper_.advance(scratch[i], drift, rng).value;
    }
  }
  state.step += 1;
  state.time += dt_;
}

LatticeState step_system(const LatticeState& state, const JumpKernel& kernel, const DriftSpec& f,
                         const NoiseSpec& noise, double dt, const RngStream& stream, LatticeOptions opt) {
  SystemStepper st(kernel, f, noise, dt, state.dim, state.box_radius, opt);
  LatticeState out = state;
  st.step(out, stream);
  return out;
}

LatticeTrajectory simulate_lattice(const LatticeState& x0, const SystemStepper& stepper, double horizon,
                                   std::size_t record_every, const RngStream& stream) {
  if (record_every == 0) throw std::invalid_argument("simulate_lattice: record_every must be >= 1");
  if (!(horizon >= 0.0)) throw std::invalid_argument("simulate_lattice: horizon must be >= 0");
  x0.validate();
  const auto steps = static_cast<std::size_t>(std::floor(horizon / stepper.dt() + 1e-9));
  LatticeTrajectory tr;
  tr.dim = x0.dim;
  tr.box_radius = x0.box_radius;
  LatticeState s = x0;
  tr.times.push_back(s.time);
  tr.frames.push_back(s.values);
  for (std::size_t k = 1; k <= steps; ++k) {
    stepper.step(s, stream);
    if (k % record_every == 0) {
      tr.times.push_back(s.time);
      tr.frames.push_back(s.values);
    }
  }
  return tr;
}

void MomentAccumulator::add(const LatticeTrajectory& traj) {
  if (times_.empty() && site_.empty()) {
    dim_ = traj.dim;
    radius_ = traj.box_radius;
    times_ = traj.times;
    site_.assign(times_.size(), std::vector<RunningStats>(Box(dim_, radius_).size()));
    total_.assign(times_.size(), RunningStats{});
  }
  if (traj.times.size() != times_.size() || traj.dim != dim_ || traj.box_radius != radius_)
    throw std::invalid_argument("MomentAccumulator: trajectory layout differs");
  for (std::size_t k = 0; k < times_.size(); ++k) {
    double tot = 0.0;
    for (std::size_t i = 0; i < traj.frames[k].size(); ++i) {
      site_[k][i].add(traj.frames[k][i]);
      tot += traj.frames[k][i];
    }
    total_[k].add(tot);
  }
}

bool FirstMomentReport::bound_pass() const {
  return std::all_of(rows.begin(), rows.end(), [](const FirstMomentRow& r) { return r.bound_ok; });
}

bool FirstMomentReport::equality_pass() const {
  return std::all_of(rows.begin(), rows.end(), [](const FirstMomentRow& r) { return r.equality_ok; });
}

FirstMomentReport first_moment_check(const MomentAccumulator& acc, const JumpKernel& kernel, const DriftSpec& f,
                                     const LatticeState& x0, double z, double abs_tol) {
  if (acc.times().empty()) throw std::invalid_argument("first_moment_check: no data");
  if (x0.dim != acc.dim() || x0.box_radius != acc.box_radius())
    throw std::invalid_argument("first_moment_check: initial state does not match the data");
  f.validate();
  FirstMomentReport rep;
  rep.lipschitz_L = f.lipschitz_L;
  rep.equality_checked = f.mode == DriftMode::zero;
  const Box box = x0.box();
  for (std::size_t k = 0; k < acc.times().size(); ++k) {
    const double t = acc.times()[k];
    const auto heat = heat_semigroup(kernel, box, x0.values, t);
    const double growth = std::exp(f.lipschitz_L * t);
    for (std::size_t i = 0; i < box.size(); ++i) {
      const auto& st = acc.sites()[k][i];
      FirstMomentRow row;
      row.t = t;
      row.site = i;
      row.mean = st.mean();
      row.se = st.count() > 1 ? st.se() : 0.0;
      row.heat = heat[i];
      row.bound = growth * heat[i];
      const double slack = z * row.se + abs_tol;
      row.bound_ok = row.mean <= row.bound + slack;
      row.equality_ok = !rep.equality_checked || std::abs(row.mean - row.heat) <= slack;
      rep.rows.push_back(row);
    }
  }
  return rep;
}

}  // namespace exlab
