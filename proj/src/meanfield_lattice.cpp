#include "dislab/meanfield_lattice.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "dislab/rng.hpp"

namespace dislab {

MfeSystem::MfeSystem(const RegularizedPotential& p, Lattice lat, double beta)
    : lattice_(lat), beta_(beta), kernel_(p, lat), op_(kernel_) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw std::invalid_argument("beta must be positive and finite");
  grad_sup_ = 0.0;
  for (std::size_t i = 0; i < p.grad1().size(); ++i) {
    grad_sup_ = std::max(grad_sup_, std::hypot(p.grad1()[i], p.grad2()[i]));
  }
  for (auto& f : flux_) f.resize(lat.sites());
}

double MfeSystem::max_stable_step() const {
  double e = lattice_.spacing();
  return 0.25 * beta_ * e * e * std::exp(-0.5 * beta_ * e * grad_sup_);
}

void MfeSystem::force(const LatticeDensityPair& rho, ForceField& out) { op_.apply(rho.plus, rho.minus, out); }

void MfeSystem::species_rhs(const std::vector<double>& f, int sign, std::vector<double>& out) {
  int n = lattice_.size();
  double e = lattice_.spacing();
  double base = 1.0 / (e * e * beta_);
  double half = 0.5 * beta_ * e * sign;
  std::size_t ns = lattice_.sites();
  // flux_[h](l) = R_h(l) f(l); h.F = eps * (+-F_axis).
  for (std::size_t idx = 0; idx < ns; ++idx) {
    double a1 = half * force_.f1[idx], a2 = half * force_.f2[idx];
    double r1p = base * std::exp(a1), r1m = base * std::exp(-a1);
    double r2p = base * std::exp(a2), r2m = base * std::exp(-a2);
    flux_[0][idx] = r1p * f[idx];
    flux_[1][idx] = r1m * f[idx];
    flux_[2][idx] = r2p * f[idx];
    flux_[3][idx] = r2m * f[idx];
  }
  out.resize(ns);
  for (int i1 = 0; i1 < n; ++i1) {
    int up1 = i1 + 1 == n ? 0 : i1 + 1, dn1 = i1 == 0 ? n - 1 : i1 - 1;
    for (int i2 = 0; i2 < n; ++i2) {
      int up2 = i2 + 1 == n ? 0 : i2 + 1, dn2 = i2 == 0 ? n - 1 : i2 - 1;
      std::size_t idx = static_cast<std::size_t>(i1) * n + i2;
      // Inflow from l - h for each h, minus the outflow from l.
      double in = flux_[0][static_cast<std::size_t>(dn1) * n + i2] + flux_[1][static_cast<std::size_t>(up1) * n + i2] +
                  flux_[2][static_cast<std::size_t>(i1) * n + dn2] + flux_[3][static_cast<std::size_t>(i1) * n + up2];
      double outflow = flux_[0][idx] + flux_[1][idx] + flux_[2][idx] + flux_[3][idx];
      out[idx] = in - outflow;
    }
  }
}

void MfeSystem::rhs(const LatticeDensityPair& rho, LatticeDensityPair& out) {
  if (!(rho.lattice == lattice_)) throw std::invalid_argument("mfe_rhs: lattice mismatch");
  op_.apply(rho.plus, rho.minus, force_);
  out.lattice = lattice_;
  species_rhs(rho.plus, +1, out.plus);
  species_rhs(rho.minus, -1, out.minus);
}

LatticeDensityPair mfe_rhs(const LatticeDensityPair& rho, const RegularizedPotential& p, double beta) {
  MfeSystem sys(p, rho.lattice, beta);
  LatticeDensityPair out;
  sys.rhs(rho, out);
  return out;
}

namespace {

void axpy(LatticeDensityPair& y, double a, const LatticeDensityPair& x, const LatticeDensityPair& base) {
  y.lattice = base.lattice;
  y.plus.resize(base.plus.size());
  y.minus.resize(base.minus.size());
  for (std::size_t i = 0; i < base.plus.size(); ++i) {
    y.plus[i] = base.plus[i] + a * x.plus[i];
    y.minus[i] = base.minus[i] + a * x.minus[i];
  }
}

void check_state(const LatticeDensityPair& s, double t, double mp0, double mm0) {
  for (std::size_t i = 0; i < s.plus.size(); ++i) {
    for (int sp = 0; sp < 2; ++sp) {
      double v = sp == 0 ? s.plus[i] : s.minus[i];
      if (!std::isfinite(v) || v < -1e-10) {
        std::ostringstream os;
        os << "solve_mfe: " << (std::isfinite(v) ? "negative" : "non-finite") << " density " << v
           << " for species " << (sp == 0 ? '+' : '-') << " at site " << i << ", t = " << t;
        throw std::runtime_error(os.str());
      }
    }
  }
  double dp = std::abs(s.mass_plus() - mp0), dm = std::abs(s.mass_minus() - mm0);
  if (dp > 1e-9 || dm > 1e-9) {
    std::ostringstream os;
    os << "solve_mfe: mass drift " << std::max(dp, dm) << " at t = " << t;
    throw std::runtime_error(os.str());
  }
}

}  // namespace

MfeTrajectory solve_mfe(const LatticeDensityPair& rho0, MfeSystem& sys, double T, const MfeOptions& opt) {
  if (!(T >= 0.0)) throw std::invalid_argument("solve_mfe: T must be nonnegative");
  if (opt.snapshot_every < 1) throw std::invalid_argument("solve_mfe: snapshot_every must be >= 1");
  double dmax = sys.max_stable_step();
  if (opt.dt < 0.0) throw std::invalid_argument("solve_mfe: dt must be positive");
  if (opt.dt > dmax * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "solve_mfe: dt = " << opt.dt << " exceeds the stability limit " << dmax;
    throw std::invalid_argument(os.str());
  }
  double dt_target = opt.dt > 0.0 ? opt.dt : dmax;

  // Segment boundaries: either the requested output times or just T.
  std::vector<double> marks = opt.snapshot_times;
  for (double m : marks) {
    if (!(m > 0.0 && m <= T * (1.0 + 1e-12))) throw std::invalid_argument("solve_mfe: snapshot time outside (0, T]");
  }
  std::sort(marks.begin(), marks.end());
  marks.erase(std::unique(marks.begin(), marks.end()), marks.end());
  bool every = marks.empty();
  if (marks.empty() || marks.back() < T) marks.push_back(T);

  MfeTrajectory traj;
  LatticeDensityPair y = rho0, k1, k2, k3, k4, tmp;
  double mp0 = y.mass_plus(), mm0 = y.mass_minus();
  auto record = [&](double t) {
    traj.times.push_back(t);
    traj.states.push_back(y);
    ForceField f;
    sys.force(y, f);
    traj.forces.push_back(std::move(f));
  };
  record(0.0);
  double t = 0.0;
  long step_count = 0;
  traj.dt = dt_target;
  for (double mark : marks) {
    double seg = mark - t;
    if (seg <= 0.0) continue;
    long steps = static_cast<long>(std::ceil(seg / dt_target - 1e-9));
    double h = seg / steps;
    traj.dt = std::min(traj.dt, h);
    for (long s = 0; s < steps; ++s) {
      if (opt.stepper == Stepper::euler) {
        sys.rhs(y, k1);
        axpy(y, h, k1, y);
      } else {
        sys.rhs(y, k1);
        axpy(tmp, 0.5 * h, k1, y);
        sys.rhs(tmp, k2);
        axpy(tmp, 0.5 * h, k2, y);
        sys.rhs(tmp, k3);
        axpy(tmp, h, k3, y);
        sys.rhs(tmp, k4);
        for (std::size_t i = 0; i < y.plus.size(); ++i) {
          y.plus[i] += h / 6.0 * (k1.plus[i] + 2.0 * k2.plus[i] + 2.0 * k3.plus[i] + k4.plus[i]);
          y.minus[i] += h / 6.0 * (k1.minus[i] + 2.0 * k2.minus[i] + 2.0 * k3.minus[i] + k4.minus[i]);
        }
      }
      ++step_count;
      t = s + 1 == steps ? mark : t + h;
      check_state(y, t, mp0, mm0);
      if (every && step_count % opt.snapshot_every == 0 && s + 1 != steps) record(t);
    }
    record(t);
  }
  return traj;
}

MfeTrajectory solve_mfe(const LatticeDensityPair& rho0, const RegularizedPotential& p, double beta, double T,
                        const MfeOptions& opt) {
  MfeSystem sys(p, rho0.lattice, beta);
  return solve_mfe(rho0, sys, T, opt);
}

namespace {

struct CdfSampler {
  std::vector<double> cdf;
  explicit CdfSampler(const std::vector<double>& w) : cdf(w.size()) {
    double acc = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      acc += std::max(w[i], 0.0);
      cdf[i] = acc;
    }
  }
  double total() const { return cdf.empty() ? 0.0 : cdf.back(); }
  std::size_t draw(Rng& rng) const {
    double u = uniform01(rng) * total();
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    std::size_t i = static_cast<std::size_t>(it - cdf.begin());
    return std::min(i, cdf.size() - 1);
  }
};

std::pair<int, int> resolve_counts(const SamplingOptions& opt, double mass_plus, double mass_minus, Rng& rng) {
  if (opt.n_plus < 0 || opt.n_minus < 0 || opt.n_plus + opt.n_minus < 1) {
    throw std::invalid_argument("sample_particles: need a positive particle count");
  }
  if (!opt.random_signs) return {opt.n_plus, opt.n_minus};
  int n = opt.n_plus + opt.n_minus;
  double p = mass_plus / (mass_plus + mass_minus);
  int np = 0;
  for (int i = 0; i < n; ++i) np += uniform01(rng) < p ? 1 : 0;
  return {np, n - np};
}

void check_species(const CdfSampler& s, int count, char label) {
  if (count > 0 && !(s.total() > 0.0)) {
    throw std::invalid_argument(std::string("sample_particles: requested ") + label +
                                " particles from a zero density");
  }
}

}  // namespace

LatticeConfiguration sample_particles(const LatticeDensityPair& rho, const SamplingOptions& opt,
                                      std::uint64_t seed) {
  Rng rng = make_rng(seed, {0x5a3d});
  auto [np, nm] = resolve_counts(opt, rho.mass_plus(), rho.mass_minus(), rng);
  CdfSampler sp(rho.plus), sm(rho.minus);
  check_species(sp, np, '+');
  check_species(sm, nm, '-');
  LatticeConfiguration c;
  c.lattice = rho.lattice;
  int n = rho.lattice.size();
  for (int i = 0; i < np; ++i) {
    c.sites.push_back(site_from_index(sp.draw(rng), n));
    c.signs.push_back(1);
  }
  for (int i = 0; i < nm; ++i) {
    c.sites.push_back(site_from_index(sm.draw(rng), n));
    c.signs.push_back(-1);
  }
  return c;
}

SignedConfiguration sample_particles(const GridDensityPair& rho, const SamplingOptions& opt, std::uint64_t seed) {
  Rng rng = make_rng(seed, {0x5a3e});
  auto [np, nm] = resolve_counts(opt, rho.mass_plus(), rho.mass_minus(), rng);
  CdfSampler sp(rho.plus), sm(rho.minus);
  check_species(sp, np, '+');
  check_species(sm, nm, '-');
  SignedConfiguration c;
  int m = rho.grid;
  auto place = [&](std::size_t idx) {
    double i1 = static_cast<double>(idx / m), i2 = static_cast<double>(idx % m);
    return wrap((i1 + uniform01(rng) - 0.5) / m, (i2 + uniform01(rng) - 0.5) / m);
  };
  for (int i = 0; i < np; ++i) {
    c.positions.push_back(place(sp.draw(rng)));
    c.signs.push_back(1);
  }
  for (int i = 0; i < nm; ++i) {
    c.positions.push_back(place(sm.draw(rng)));
    c.signs.push_back(-1);
  }
  return c;
}

}  // namespace dislab
