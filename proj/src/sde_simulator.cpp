#include "dislab/sde_simulator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dislab {

double default_sde_step(const AssumptionReport& a, double delta, double beta) {
  double c2 = a.constants[2];
  if (!(c2 > 0.0) || !std::isfinite(beta)) return 1e-3;
  return std::min(1e-3, delta * delta / (10.0 * c2 * beta));
}

namespace {

double noise_scale(double beta, double dt) { return std::isinf(beta) ? 0.0 : std::sqrt(2.0 * dt / beta); }

void check(const SignedConfiguration& c, double beta, double T, double dt) {
  validate(c);
  if (!(beta > 0.0)) throw std::invalid_argument("sde: beta must be positive");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("sde: dt must be positive");
  if (!(T >= 0.0) || !std::isfinite(T)) throw std::invalid_argument("sde: T must be nonnegative");
}

// Step indices at which to record, with the matching times.
struct Schedule {
  long steps = 0;
  std::vector<long> marks;
  std::vector<double> times;
};

Schedule make_schedule(double T, double dt, const std::vector<double>& req) {
  Schedule s;
  double q = T / dt;
  s.steps = static_cast<long>(std::ceil(q - 1e-9));
  auto time_of = [&](long k) { return k >= s.steps ? T : k * dt; };
  if (req.empty()) {
    for (long k = 0; k <= s.steps; ++k) {
      s.marks.push_back(k);
      s.times.push_back(time_of(k));
    }
    return s;
  }
  std::vector<double> r = req;
  std::sort(r.begin(), r.end());
  for (double t : r) {
    if (!(t >= 0.0 && t <= T * (1 + 1e-12))) throw std::invalid_argument("sde: snapshot time outside [0, T]");
    long k;
    if (std::abs(t - T) <= 1e-12 * std::max(1.0, T)) {
      k = s.steps;
    } else {
      double kq = t / dt;
      k = std::lround(kq);
      if (std::abs(kq - k) > 1e-9 * std::max(1.0, kq)) {
        throw std::invalid_argument("sde: snapshot time is not a multiple of dt");
      }
    }
    s.marks.push_back(k);
    s.times.push_back(time_of(k));
  }
  return s;
}

std::vector<NormalSource> make_noise(std::uint64_t seed, std::size_t n, const std::vector<std::uint64_t>& ids) {
  if (!ids.empty() && ids.size() != n) throw std::invalid_argument("sde: stream_ids size mismatch");
  std::vector<NormalSource> s;
  s.reserve(n);
  for (std::size_t i = 0; i < n; ++i) s.emplace_back(make_rng(seed, {3, ids.empty() ? i : ids[i]}));
  return s;
}

}  // namespace

SignedConfiguration em_step(const SignedConfiguration& c, const RegularizedPotential& p, double beta, double dt,
                            const std::vector<Vec2>& xi, KernelEval eval) {
  if (xi.size() != c.size()) throw std::invalid_argument("em_step: one increment per particle required");
  std::vector<Vec2> f;
  particle_forces(c, p, eval, f);
  double s = noise_scale(beta, dt);
  SignedConfiguration out = c;
  for (std::size_t i = 0; i < c.size(); ++i) {
    out.positions[i] = wrap(c.positions[i].vec() + f[i] * dt + xi[i] * s);
  }
  return out;
}

SdeTrajectory simulate_sde(const SignedConfiguration& c0, const RegularizedPotential& p, double beta, double T,
                           double dt, std::uint64_t seed, const SdeOptions& opt) {
  check(c0, beta, T, dt);
  Schedule sch = make_schedule(T, dt, opt.snapshot_times);
  auto noise = make_noise(seed, c0.size(), opt.stream_ids);
  SdeTrajectory tr;
  tr.dt = dt;
  tr.seed = seed;
  SignedConfiguration c = c0;
  std::vector<Vec2> f;
  std::size_t mi = 0;
  auto record = [&](long k) {
    while (mi < sch.marks.size() && sch.marks[mi] == k) {
      tr.times.push_back(sch.times[mi]);
      tr.snapshots.push_back(c);
      ++mi;
    }
  };
  record(0);
  for (long k = 1; k <= sch.steps; ++k) {
    double h = k == sch.steps ? T - (k - 1) * dt : dt;
    double s = noise_scale(beta, h);
    particle_forces(c, p, opt.eval, f);
    for (std::size_t i = 0; i < c.size(); ++i) {
      double z1 = noise[i](), z2 = noise[i]();
      c.positions[i] = wrap(c.positions[i].vec() + f[i] * h + Vec2{z1, z2} * s);
    }
    record(k);
  }
  return tr;
}

SdeTrajectory simulate_coupled_sde(const SignedConfiguration& c0, const MfTrajectory& mf,
                                   const RegularizedPotential& p, double beta, double T, double dt,
                                   std::uint64_t seed, const SdeOptions& opt) {
  check(c0, beta, T, dt);
  if (mf.forces.empty() || mf.forces.size() != mf.times.size()) {
    throw std::invalid_argument("simulate_coupled_sde: mean-field trajectory stores no forces");
  }
  if (mf.times.front() > 0.0 || mf.times.back() < T * (1.0 - 1e-12)) {
    throw std::invalid_argument("simulate_coupled_sde: mean-field trajectory does not cover [0, T]");
  }
  Schedule sch = make_schedule(T, dt, opt.snapshot_times);
  auto noise = make_noise(seed, c0.size(), opt.stream_ids);
  std::size_t n = c0.size();
  SdeTrajectory tr;
  tr.dt = dt;
  tr.seed = seed;
  SignedConfiguration x = c0, xb = c0;
  std::vector<Vec2> disp(n), f;
  std::size_t mi = 0;
  auto record = [&](long k) {
    while (mi < sch.marks.size() && sch.marks[mi] == k) {
      tr.times.push_back(sch.times[mi]);
      tr.snapshots.push_back(x);
      tr.aux.push_back(xb);
      tr.displacement.push_back(disp);
      ++mi;
    }
  };
  std::size_t seg = 0;
  auto mf_force = [&](TorusPoint y, int b, double t) {
    while (seg + 1 < mf.times.size() && mf.times[seg + 1] <= t) ++seg;
    Vec2 fa = mf.forces[seg].interpolate(y, b);
    if (seg + 1 >= mf.times.size()) return fa;
    double w = (t - mf.times[seg]) / (mf.times[seg + 1] - mf.times[seg]);
    Vec2 fb = mf.forces[seg + 1].interpolate(y, b);
    return fa * (1.0 - w) + fb * w;
  };
  record(0);
  for (long k = 1; k <= sch.steps; ++k) {
    double t = (k - 1) * dt;
    double h = k == sch.steps ? T - t : dt;
    double s = noise_scale(beta, h);
    particle_forces(x, p, opt.eval, f);
    for (std::size_t i = 0; i < n; ++i) {
      Vec2 z{noise[i](), noise[i]()};
      Vec2 fb = mf_force(xb.positions[i], xb.signs[i], t);
      Vec2 dx = f[i] * h + z * s, dxb = fb * h + z * s;
      x.positions[i] = wrap(x.positions[i].vec() + dx);
      xb.positions[i] = wrap(xb.positions[i].vec() + dxb);
      disp[i] += dx - dxb;
    }
    record(k);
  }
  return tr;
}

std::vector<double> mean_coupling_distance(const SdeTrajectory& tr) {
  std::vector<double> out;
  for (const auto& d : tr.displacement) {
    double s = 0.0;
    for (const Vec2& v : d) s += v.norm();
    out.push_back(d.empty() ? 0.0 : s / static_cast<double>(d.size()));
  }
  return out;
}

}  // namespace dislab
