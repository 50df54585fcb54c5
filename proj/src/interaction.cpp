#include "dislab/interaction.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dislab {

namespace {
constexpr double kPi = std::numbers::pi;

void check_signs(const std::vector<int>& signs, std::size_t n) {
  if (n == 0) throw std::invalid_argument("configuration must hold at least one particle");
  if (signs.size() != n) throw std::invalid_argument("configuration: positions and signs differ in length");
  for (int b : signs) {
    if (b != 1 && b != -1) throw std::invalid_argument("configuration: signs must be +1 or -1");
  }
}
}  // namespace

void validate(const SignedConfiguration& c) { check_signs(c.signs, c.positions.size()); }

void validate(const LatticeConfiguration& c) {
  check_signs(c.signs, c.sites.size());
  int n = c.lattice.size();
  for (const auto& s : c.sites) {
    if (s.i1 < 0 || s.i1 >= n || s.i2 < 0 || s.i2 >= n) {
      throw std::invalid_argument("configuration: lattice site out of range");
    }
  }
}

int count_plus(const std::vector<int>& signs) {
  return static_cast<int>(std::count(signs.begin(), signs.end(), 1));
}

LatticeKernel::LatticeKernel(const RegularizedPotential& p, Lattice lat) : lattice_(lat) {
  int n = lat.size();
  int k = p.cutoff();
  RealFft fft({n, n});
  int hl = fft.half_last();
  std::size_t ns = fft.spectral_size();
  std::vector<cplx> sv(ns), s1(ns), s2(ns), sl(ns);
  double scale = static_cast<double>(n) * n;
  for (int k1 = -k; k1 <= k; ++k1) {
    int q1 = mod(k1, n);
    for (int k2 = -k; k2 <= k; ++k2) {
      int q2 = mod(k2, n);
      if (q2 >= hl) continue;
      double c = p.coeff(k1, k2) * scale;
      if (c == 0.0) continue;
      std::size_t idx = static_cast<std::size_t>(q1) * hl + q2;
      sv[idx] += c;
      s1[idx] += cplx(0.0, 2.0 * kPi * k1 * c);
      s2[idx] += cplx(0.0, 2.0 * kPi * k2 * c);
      sl[idx] += -4.0 * kPi * kPi * (static_cast<double>(k1) * k1 + static_cast<double>(k2) * k2) * c;
    }
  }
  fft.inverse(sv, value_);
  fft.inverse(s1, grad1_);
  fft.inverse(s2, grad2_);
  fft.inverse(sl, lap_);
}

double energy(const SignedConfiguration& c, const RegularizedPotential& p) {
  validate(c);
  std::size_t n = c.size();
  double e = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      TorusPoint d = wrap(torus_difference(c.positions[i], c.positions[j]));
      e += c.signs[i] * c.signs[j] * p.value_at(d);
    }
  }
  return e / (static_cast<double>(n) * n);
}

double energy(const LatticeConfiguration& c, const LatticeKernel& k) {
  validate(c);
  std::size_t n = c.size();
  double e = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      e += c.signs[i] * c.signs[j] * k.value(k.offset(c.sites[i], c.sites[j]));
    }
  }
  return e / (static_cast<double>(n) * n);
}

void particle_forces(const SignedConfiguration& c, const RegularizedPotential& p, KernelEval eval,
                     std::vector<Vec2>& out) {
  std::size_t n = c.size();
  out.assign(n, Vec2{});
  double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    Vec2 xi = c.positions[i].vec();
    for (std::size_t j = i + 1; j < n; ++j) {
      Vec2 d = xi - c.positions[j].vec();
      Vec2 g = eval == KernelEval::exact ? p.gradient_at(wrap(d)) : p.gradient_interpolated(d);
      // Pair term enters i and j with opposite signs since grad V is odd.
      Vec2 t = g * (c.signs[i] * c.signs[j] * inv_n);
      out[i] -= t;
      out[j] += t;
    }
  }
}

std::vector<Vec2> particle_forces(const SignedConfiguration& c, const RegularizedPotential& p,
                                  KernelEval eval) {
  validate(c);
  std::vector<Vec2> out;
  particle_forces(c, p, eval, out);
  return out;
}

std::vector<Vec2> particle_forces(const LatticeConfiguration& c, const LatticeKernel& k) {
  validate(c);
  std::size_t n = c.size();
  std::vector<Vec2> out(n);
  double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      Vec2 t = k.gradient(k.offset(c.sites[i], c.sites[j])) * (c.signs[i] * c.signs[j] * inv_n);
      out[i] -= t;
      out[j] += t;
    }
  }
  return out;
}

LatticeForceOperator::LatticeForceOperator(const LatticeKernel& k)
    : n_(k.size()), fft_({k.size(), k.size()}) {
  fft_.forward(k.grad1(), k1_);
  fft_.forward(k.grad2(), k2_);
  double e2 = 1.0 / (static_cast<double>(n_) * n_);
  for (auto& z : k1_) z *= -e2;
  for (auto& z : k2_) z *= -e2;
  diff_.resize(fft_.real_size());
}

void LatticeForceOperator::apply(const std::vector<double>& plus, const std::vector<double>& minus,
                                 ForceField& out) {
  std::size_t n = fft_.real_size();
  if (plus.size() != n || minus.size() != n) {
    throw std::invalid_argument("mean_field_force: density does not match the kernel lattice");
  }
  for (std::size_t i = 0; i < n; ++i) diff_[i] = plus[i] - minus[i];
  fft_.forward(diff_, work_);
  s1_.resize(work_.size());
  s2_.resize(work_.size());
  for (std::size_t i = 0; i < work_.size(); ++i) {
    s1_[i] = work_[i] * k1_[i];
    s2_[i] = work_[i] * k2_[i];
  }
  out.size = n_;
  fft_.inverse(s1_, out.f1);
  fft_.inverse(s2_, out.f2);
}

ForceField mean_field_force(const LatticeDensityPair& rho, const LatticeKernel& k) {
  if (!(rho.lattice == k.lattice())) {
    throw std::invalid_argument("mean_field_force: density and kernel lattices differ");
  }
  LatticeForceOperator op(k);
  ForceField f;
  op.apply(rho.plus, rho.minus, f);
  return f;
}

ForceField mean_field_force(const LatticeDensityPair& rho, const RegularizedPotential& p) {
  return mean_field_force(rho, LatticeKernel(p, rho.lattice));
}

GridForceOperator::GridForceOperator(const RegularizedPotential& p, int m) : m_(m) {
  int mp = p.grid();
  if (m < 2 || (m % mp != 0 && mp % m != 0)) {
    throw std::invalid_argument("mean_field_force: grid M = " + std::to_string(m) +
                                " is not an integer refinement of the potential grid " +
                                std::to_string(mp));
  }
  int hl = m / 2 + 1;
  m1_.assign(static_cast<std::size_t>(m) * hl, cplx(0.0));
  m2_.assign(m1_.size(), cplx(0.0));
  for (int i1 = 0; i1 < m; ++i1) {
    int k1 = wavenumber(i1, m);
    if (2 * std::abs(k1) >= m) continue;  // drop Nyquist
    for (int k2 = 0; k2 < hl && 2 * k2 < m; ++k2) {
      double c = p.coeff(k1, k2);
      std::size_t idx = static_cast<std::size_t>(i1) * hl + k2;
      m1_[idx] = cplx(0.0, -2.0 * kPi * k1 * c);
      m2_[idx] = cplx(0.0, -2.0 * kPi * k2 * c);
    }
  }
}

void GridForceOperator::force_spectra(const std::vector<cplx>& diff_hat, std::vector<cplx>& f1_hat,
                                      std::vector<cplx>& f2_hat) const {
  // Convolution with a unit-torus kernel is a pointwise product with its
  // Fourier coefficients, so FFT(F) = multiplier * FFT(rho+ - rho-).
  f1_hat.resize(diff_hat.size());
  f2_hat.resize(diff_hat.size());
  for (std::size_t i = 0; i < diff_hat.size(); ++i) {
    f1_hat[i] = m1_[i] * diff_hat[i];
    f2_hat[i] = m2_[i] * diff_hat[i];
  }
}

ForceField mean_field_force(const GridDensityPair& rho, const RegularizedPotential& p) {
  GridForceOperator op(p, rho.grid);
  RealFft fft({rho.grid, rho.grid});
  std::vector<double> diff(rho.plus.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = rho.plus[i] - rho.minus[i];
  std::vector<cplx> dh, f1h, f2h;
  fft.forward(diff, dh);
  op.force_spectra(dh, f1h, f2h);
  ForceField f;
  f.size = rho.grid;
  fft.inverse(f1h, f.f1);
  fft.inverse(f2h, f.f2);
  return f;
}

}  // namespace dislab
