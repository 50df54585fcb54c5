#include "dislab/meanfield_continuum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace dislab {

namespace {
constexpr double kPi = std::numbers::pi;

bool power_of_two(int m) { return m > 0 && (m & (m - 1)) == 0; }
}  // namespace

MfSystem::MfSystem(const RegularizedPotential& p, int m, double beta, bool force_enabled)
    : m_(m), beta_(beta), force_enabled_(force_enabled), fft_({m, m}), op_(p, m) {
  if (!power_of_two(m)) throw std::invalid_argument("MfSystem: grid must be a power of two");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw std::invalid_argument("beta must be positive and finite");
  int hl = fft_.half_last();
  lap_.resize(fft_.spectral_size());
  keep_.resize(fft_.spectral_size());
  for (int i1 = 0; i1 < m; ++i1) {
    int k1 = wavenumber(i1, m);
    for (int k2 = 0; k2 < hl; ++k2) {
      std::size_t idx = static_cast<std::size_t>(i1) * hl + k2;
      lap_[idx] = -4.0 * kPi * kPi * (static_cast<double>(k1) * k1 + static_cast<double>(k2) * k2) / beta;
      keep_[idx] = 3 * std::abs(k1) < m && 3 * k2 < m;
    }
  }
}

void MfSystem::to_spectral(const GridDensityPair& rho, std::vector<cplx>& plus, std::vector<cplx>& minus) {
  if (rho.grid != m_) throw std::invalid_argument("MfSystem: grid mismatch");
  fft_.forward(rho.plus, plus);
  fft_.forward(rho.minus, minus);
}

void MfSystem::to_physical(const std::vector<cplx>& plus, const std::vector<cplx>& minus, GridDensityPair& rho) {
  rho.grid = m_;
  fft_.inverse(plus, rho.plus);
  fft_.inverse(minus, rho.minus);
}

void MfSystem::force(const std::vector<cplx>& plus, const std::vector<cplx>& minus, ForceField& out) {
  diff_.resize(plus.size());
  for (std::size_t i = 0; i < plus.size(); ++i) diff_[i] = plus[i] - minus[i];
  op_.force_spectra(diff_, f1h_, f2h_);
  out.size = m_;
  fft_.inverse(f1h_, out.f1);
  fft_.inverse(f2h_, out.f2);
}

void MfSystem::advection(const std::vector<cplx>& plus, const std::vector<cplx>& minus, std::vector<cplx>& dplus,
                         std::vector<cplx>& dminus) {
  std::size_t ns = plus.size();
  dplus.assign(ns, cplx(0.0));
  dminus.assign(ns, cplx(0.0));
  if (!force_enabled_) return;
  int hl = fft_.half_last();
  diff_.resize(ns);
  for (std::size_t i = 0; i < ns; ++i) diff_[i] = plus[i] - minus[i];
  op_.force_spectra(diff_, f1h_, f2h_);
  for (std::size_t i = 0; i < ns; ++i) {
    if (!keep_[i]) f1h_[i] = f2h_[i] = 0.0;
  }
  fft_.inverse(f1h_, f1_);
  fft_.inverse(f2h_, f2_);
  tmp_.resize(ns);
  prod_.resize(fft_.real_size());
  for (int s = 0; s < 2; ++s) {
    const std::vector<cplx>& src = s == 0 ? plus : minus;
    std::vector<cplx>& dst = s == 0 ? dplus : dminus;
    double b = s == 0 ? 1.0 : -1.0;
    for (std::size_t i = 0; i < ns; ++i) tmp_[i] = keep_[i] ? src[i] : cplx(0.0);
    fft_.inverse(tmp_, rho_);
    for (int axis = 0; axis < 2; ++axis) {
      const std::vector<double>& f = axis == 0 ? f1_ : f2_;
      for (std::size_t i = 0; i < prod_.size(); ++i) prod_[i] = b * rho_[i] * f[i];
      fft_.forward(prod_, acc_);
      for (int i1 = 0; i1 < m_; ++i1) {
        int k1 = wavenumber(i1, m_);
        for (int k2 = 0; k2 < hl; ++k2) {
          std::size_t idx = static_cast<std::size_t>(i1) * hl + k2;
          if (!keep_[idx]) continue;
          double k = axis == 0 ? k1 : k2;
          dst[idx] -= cplx(0.0, 2.0 * kPi * k) * acc_[idx];
        }
      }
    }
  }
}

GridDensityPair mf_rhs(const GridDensityPair& rho, const RegularizedPotential& p, double beta) {
  MfSystem sys(p, rho.grid, beta);
  std::vector<cplx> sp, sm, dp, dm;
  sys.to_spectral(rho, sp, sm);
  sys.advection(sp, sm, dp, dm);
  const auto& lap = sys.laplacian_symbol();
  for (std::size_t i = 0; i < sp.size(); ++i) {
    dp[i] += lap[i] * sp[i];
    dm[i] += lap[i] * sm[i];
  }
  GridDensityPair out;
  sys.to_physical(dp, dm, out);
  return out;
}

namespace {

void check_grid_state(const GridDensityPair& s, double t, double mp0, double mm0) {
  for (std::size_t i = 0; i < s.plus.size(); ++i) {
    for (int sp = 0; sp < 2; ++sp) {
      double v = sp == 0 ? s.plus[i] : s.minus[i];
      if (!std::isfinite(v) || v < -1e-10) {
        std::ostringstream os;
        os << "solve_mf: " << (std::isfinite(v) ? "negative" : "non-finite") << " density " << v
           << " for species " << (sp == 0 ? '+' : '-') << " at grid index " << i << ", t = " << t;
        throw std::runtime_error(os.str());
      }
    }
  }
  double d = std::max(std::abs(s.mass_plus() - mp0), std::abs(s.mass_minus() - mm0));
  if (d > 1e-9) {
    std::ostringstream os;
    os << "solve_mf: mass drift " << d << " at t = " << t;
    throw std::runtime_error(os.str());
  }
}

}  // namespace

MfTrajectory solve_mf(const GridDensityPair& rho0, const RegularizedPotential& p, double beta, double T,
                      const MfOptions& opt) {
  if (!(T >= 0.0)) throw std::invalid_argument("solve_mf: T must be nonnegative");
  if (!(opt.dt > 0.0)) throw std::invalid_argument("solve_mf: dt must be positive");
  if (opt.snapshot_every < 1) throw std::invalid_argument("solve_mf: snapshot_every must be >= 1");
  MfSystem sys(p, rho0.grid, beta, opt.force_enabled);
  std::vector<double> marks = opt.snapshot_times;
  for (double m : marks) {
    if (!(m > 0.0 && m <= T * (1.0 + 1e-12))) throw std::invalid_argument("solve_mf: snapshot time outside (0, T]");
  }
  std::sort(marks.begin(), marks.end());
  marks.erase(std::unique(marks.begin(), marks.end()), marks.end());
  bool every = marks.empty();
  if (marks.empty() || marks.back() < T) marks.push_back(T);

  std::vector<cplx> yp, ym, np, nm, ap, am, bp, bm;
  sys.to_spectral(rho0, yp, ym);
  double mp0 = rho0.mass_plus(), mm0 = rho0.mass_minus();
  std::size_t ns = yp.size();
  const auto& lap = sys.laplacian_symbol();
  std::vector<double> decay(ns);

  MfTrajectory traj;
  traj.dt = opt.dt;
  GridDensityPair phys;
  auto record = [&](double t) {
    sys.to_physical(yp, ym, phys);
    check_grid_state(phys, t, mp0, mm0);
    traj.times.push_back(t);
    traj.states.push_back(phys);
    if (opt.store_forces) {
      ForceField f;
      sys.force(yp, ym, f);
      traj.forces.push_back(std::move(f));
    }
  };
  record(0.0);
  double t = 0.0;
  long count = 0;
  double last_h = -1.0;
  for (double mark : marks) {
    double seg = mark - t;
    if (seg <= 0.0) continue;
    long steps = static_cast<long>(std::ceil(seg / opt.dt - 1e-9));
    double h = seg / steps;
    traj.dt = std::min(traj.dt, h);
    if (h != last_h) {
      for (std::size_t i = 0; i < ns; ++i) decay[i] = std::exp(lap[i] * h);
      last_h = h;
    }
    for (long s = 0; s < steps; ++s) {
      if (sys.force_enabled()) {
        sys.advection(yp, ym, np, nm);
        ap.resize(ns);
        am.resize(ns);
        for (std::size_t i = 0; i < ns; ++i) {
          ap[i] = decay[i] * (yp[i] + h * np[i]);
          am[i] = decay[i] * (ym[i] + h * nm[i]);
        }
        sys.advection(ap, am, bp, bm);
        for (std::size_t i = 0; i < ns; ++i) {
          yp[i] = decay[i] * yp[i] + 0.5 * h * (decay[i] * np[i] + bp[i]);
          ym[i] = decay[i] * ym[i] + 0.5 * h * (decay[i] * nm[i] + bm[i]);
        }
      } else {
        for (std::size_t i = 0; i < ns; ++i) {
          yp[i] *= decay[i];
          ym[i] *= decay[i];
        }
      }
      ++count;
      t = s + 1 == steps ? mark : t + h;
      if (every && count % opt.snapshot_every == 0 && s + 1 != steps) record(t);
    }
    record(t);
  }
  return traj;
}

std::vector<double> heat_kernel(double beta, double t, int m) {
  if (!(t > 0.0)) throw std::invalid_argument("heat_kernel: t must be positive");
  if (!(beta > 0.0)) throw std::invalid_argument("heat_kernel: beta must be positive");
  RealFft fft({m, m});
  int hl = fft.half_last();
  std::vector<cplx> spec(fft.spectral_size(), cplx(0.0));
  double scale = static_cast<double>(m) * m;
  for (int i1 = 0; i1 < m; ++i1) {
    int k1 = wavenumber(i1, m);
    if (2 * std::abs(k1) >= m) continue;
    for (int k2 = 0; k2 < hl && 2 * k2 < m; ++k2) {
      double k2sum = static_cast<double>(k1) * k1 + static_cast<double>(k2) * k2;
      spec[static_cast<std::size_t>(i1) * hl + k2] = scale * std::exp(-4.0 * kPi * kPi * k2sum * t / beta);
    }
  }
  std::vector<double> out;
  fft.inverse(spec, out);
  return out;
}

GradientL1 heat_kernel_gradient_l1(double beta, double t, int m) {
  std::vector<double> phi = heat_kernel(beta, t, m);
  RealFft fft({m, m});
  int hl = fft.half_last();
  std::vector<cplx> s, s1, s2;
  fft.forward(phi, s);
  s1 = s;
  s2 = s;
  for (int i1 = 0; i1 < m; ++i1) {
    int k1 = wavenumber(i1, m);
    for (int k2 = 0; k2 < hl; ++k2) {
      std::size_t idx = static_cast<std::size_t>(i1) * hl + k2;
      bool nyq = 2 * std::abs(k1) >= m || 2 * k2 >= m;
      s1[idx] = nyq ? cplx(0.0) : cplx(0.0, 2.0 * kPi * k1) * s[idx];
      s2[idx] = nyq ? cplx(0.0) : cplx(0.0, 2.0 * kPi * k2) * s[idx];
    }
  }
  std::vector<double> g1, g2;
  fft.inverse(s1, g1);
  fft.inverse(s2, g2);
  GradientL1 r{0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < g1.size(); ++i) {
    r.component_sum += std::abs(g1[i]) + std::abs(g2[i]);
    r.euclidean += std::hypot(g1[i], g2[i]);
    r.single_partial += std::abs(g1[i]);
  }
  double n = static_cast<double>(g1.size());
  r.component_sum /= n;
  r.euclidean /= n;
  r.single_partial /= n;
  return r;
}

LatticeDensityPair restrict_to_lattice(const GridDensityPair& rho, double eps) {
  Lattice lat = Lattice::from_spacing(eps);
  int n = lat.size(), m = rho.grid;
  if (m % n != 0) {
    throw std::invalid_argument("restrict_to_lattice: 1/eps = " + std::to_string(n) +
                                " does not divide the grid size " + std::to_string(m));
  }
  int stride = m / n;
  LatticeDensityPair out(lat);
  for (int i1 = 0; i1 < n; ++i1) {
    for (int i2 = 0; i2 < n; ++i2) {
      std::size_t src = static_cast<std::size_t>(i1 * stride) * m + i2 * stride;
      std::size_t dst = static_cast<std::size_t>(i1) * n + i2;
      out.plus[dst] = rho.plus[src];
      out.minus[dst] = rho.minus[src];
    }
  }
  return out;
}

GridDensityPair interpolate_to_grid(const LatticeDensityPair& rho, int m) {
  int n = rho.lattice.size();
  if (m % n != 0) throw std::invalid_argument("interpolate_to_grid: M must be a multiple of 1/eps");
  RealFft small({n, n}), big({m, m});
  int hs = small.half_last(), hb = big.half_last();
  GridDensityPair out(m);
  double scale = (static_cast<double>(m) * m) / (static_cast<double>(n) * n);
  for (int s = 0; s < 2; ++s) {
    std::vector<cplx> a, b(big.spectral_size(), cplx(0.0));
    small.forward(s == 0 ? rho.plus : rho.minus, a);
    for (int i1 = 0; i1 < n; ++i1) {
      int k1 = wavenumber(i1, n);
      // Split the Nyquist row/column evenly so the interpolant stays real and symmetric.
      double w1 = (n % 2 == 0 && 2 * std::abs(k1) == n) ? 0.5 : 1.0;
      for (int k2 = 0; k2 < hs; ++k2) {
        double w2 = (n % 2 == 0 && 2 * k2 == n) ? 0.5 : 1.0;
        cplx v = a[static_cast<std::size_t>(i1) * hs + k2] * scale * w1;
        std::size_t j1 = static_cast<std::size_t>(mod(k1, m));
        b[j1 * hb + k2] += v * w2;
        if (w1 == 0.5) b[static_cast<std::size_t>(mod(-k1, m)) * hb + k2] += v * w2;
      }
    }
    big.inverse(b, s == 0 ? out.plus : out.minus);
  }
  return out;
}

}  // namespace dislab
