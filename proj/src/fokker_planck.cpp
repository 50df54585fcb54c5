#include "dislab/fokker_planck.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "dislab/spectral.hpp"

namespace dislab {

namespace {

double species_mass(const InitialCondition& ic, int sign) { return sign > 0 ? ic.mass_plus : 1.0 - ic.mass_plus; }

void check_signs(const std::vector<int>& signs) {
  if (signs.empty() || signs.size() > 2) throw std::invalid_argument("Fokker-Planck solvers support 1 or 2 particles");
  for (int b : signs) {
    if (b != 1 && b != -1) throw std::invalid_argument("signs must be +1 or -1");
  }
}

std::vector<double> sorted_marks(const std::vector<double>& req, double T) {
  std::vector<double> marks = req;
  for (double m : marks) {
    if (!(m > 0.0 && m <= T * (1.0 + 1e-12))) throw std::invalid_argument("snapshot time outside (0, T]");
  }
  std::sort(marks.begin(), marks.end());
  marks.erase(std::unique(marks.begin(), marks.end()), marks.end());
  if (marks.empty() || marks.back() < T) marks.push_back(T);
  return marks;
}

}  // namespace

std::vector<double> product_initial_law(const InitialCondition& ic, const std::vector<int>& signs,
                                        const LatticeStateSpace& space) {
  check_signs(signs);
  validate(ic);
  if (static_cast<int>(signs.size()) != space.particles) throw std::invalid_argument("sign count mismatch");
  int n = space.lattice.size();
  std::vector<double> out(space.states());
  for (std::size_t s = 0; s < out.size(); ++s) {
    auto x = space.decode(s);
    double v = 1.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      double mass = species_mass(ic, signs[i]);
      if (!(mass > 0.0)) throw std::invalid_argument("initial law: species has zero mass");
      v *= initial_density(ic, signs[i], site_position(x[i], n)) / mass;
    }
    out[s] = v;
  }
  return out;
}

std::vector<double> product_initial_law(const InitialCondition& ic, const std::vector<int>& signs, int m) {
  check_signs(signs);
  validate(ic);
  std::size_t cells = static_cast<std::size_t>(m) * m;
  std::vector<std::vector<double>> one(signs.size(), std::vector<double>(cells));
  for (std::size_t i = 0; i < signs.size(); ++i) {
    double mass = species_mass(ic, signs[i]);
    if (!(mass > 0.0)) throw std::invalid_argument("initial law: species has zero mass");
    for (std::size_t c = 0; c < cells; ++c) {
      double x1 = static_cast<double>(c / m) / m, x2 = static_cast<double>(c % m) / m;
      one[i][c] = initial_density(ic, signs[i], wrap(x1, x2)) / mass;
    }
  }
  if (signs.size() == 1) return one[0];
  std::vector<double> out(cells * cells);
  for (std::size_t a = 0; a < cells; ++a) {
    for (std::size_t b = 0; b < cells; ++b) out[a * cells + b] = one[0][a] * one[1][b];
  }
  return out;
}

FpTrajectory solve_discrete_fp(const std::vector<double>& f0, const LatticeStateSpace& space,
                               const std::vector<int>& signs, const RegularizedPotential& p, double beta, double T,
                               const FpOptions& opt) {
  check_signs(signs);
  if (static_cast<int>(signs.size()) != space.particles) throw std::invalid_argument("sign count mismatch");
  if (f0.size() != space.states()) throw std::invalid_argument("solve_discrete_fp: initial law size mismatch");
  if (!(T >= 0.0)) throw std::invalid_argument("solve_discrete_fp: T must be nonnegative");
  DiscreteGenerator gen(space, pairwise_force(p, signs), beta);
  // The spectrum reaches twice the exit rate; keep h * lambda <= 0.2 for accuracy.
  double dt = opt.dt > 0.0 ? opt.dt : 0.1 / gen.max_exit_rate();
  std::vector<double> marks = sorted_marks(opt.snapshot_times, T);

  FpTrajectory tr;
  tr.dt = dt;
  tr.times.push_back(0.0);
  tr.states.push_back(f0);
  std::vector<double> y = f0, k1, k2, k3, k4, tmp(y.size());
  std::size_t S = y.size();
  double t = 0.0;
  for (double mark : marks) {
    double seg = mark - t;
    if (seg <= 0.0) continue;
    long steps = static_cast<long>(std::ceil(seg / dt - 1e-9));
    double h = seg / steps;
    for (long s = 0; s < steps; ++s) {
      gen.apply_adjoint(y, k1);
      for (std::size_t i = 0; i < S; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
      gen.apply_adjoint(tmp, k2);
      for (std::size_t i = 0; i < S; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
      gen.apply_adjoint(tmp, k3);
      for (std::size_t i = 0; i < S; ++i) tmp[i] = y[i] + h * k3[i];
      gen.apply_adjoint(tmp, k4);
      for (std::size_t i = 0; i < S; ++i) y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    t = mark;
    tr.times.push_back(t);
    tr.states.push_back(y);
  }
  return tr;
}

namespace {

// Drift field and spectral operators of the continuum Fokker-Planck equation.
class ContinuumFp {
 public:
  ContinuumFp(int m, const std::vector<int>& signs, const RegularizedPotential& p, double beta)
      : m_(m), n_(static_cast<int>(signs.size())), fft_(std::vector<int>(2 * signs.size(), m)) {
    std::size_t R = fft_.real_size(), S = fft_.spectral_size();
    int d = 2 * n_;
    // Wavenumbers per spectral index and dimension.
    wave_.assign(S * d, 0);
    keep_.assign(S, 1);
    lap_.assign(S, 0.0);
    int hl = fft_.half_last();
    for (std::size_t s = 0; s < S; ++s) {
      std::size_t rest = s;
      int last = static_cast<int>(rest % hl);
      rest /= hl;
      std::vector<int> idx(d);
      idx[d - 1] = last;
      for (int a = d - 2; a >= 0; --a) {
        idx[a] = static_cast<int>(rest % m);
        rest /= m;
      }
      double k2 = 0.0;
      for (int a = 0; a < d; ++a) {
        int k = a == d - 1 ? idx[a] : wavenumber(idx[a], m);
        if (2 * std::abs(k) == m) k = 0;  // drop the Nyquist mode in derivatives
        wave_[s * d + a] = k;
        if (3 * std::abs(k) >= m) keep_[s] = 0;
        k2 += static_cast<double>(k) * k;
      }
      lap_[s] = std::isinf(beta) ? 0.0 : -4.0 * std::numbers::pi * std::numbers::pi * k2 / beta;
    }
    // Drift samples. Only pair offsets matter, so tabulate grad V on the m x m offsets.
    force_.assign(static_cast<std::size_t>(d), std::vector<double>(R, 0.0));
    if (n_ == 2) {
      std::size_t cells = static_cast<std::size_t>(m) * m;
      std::vector<Vec2> g(cells);
      for (std::size_t c = 0; c < cells; ++c) {
        g[c] = p.gradient_at(wrap(static_cast<double>(c / m) / m, static_cast<double>(c % m) / m));
      }
      double w = signs[0] * signs[1] * 0.5;
      for (std::size_t a = 0; a < cells; ++a) {
        int a1 = static_cast<int>(a / m), a2 = static_cast<int>(a % m);
        for (std::size_t b = 0; b < cells; ++b) {
          int b1 = static_cast<int>(b / m), b2 = static_cast<int>(b % m);
          Vec2 gv = g[static_cast<std::size_t>(mod(a1 - b1, m)) * m + mod(a2 - b2, m)];
          std::size_t r = a * cells + b;
          force_[0][r] = -w * gv.x1;
          force_[1][r] = -w * gv.x2;
          force_[2][r] = w * gv.x1;
          force_[3][r] = w * gv.x2;
        }
      }
    }
  }

  std::size_t spectral_size() const { return fft_.spectral_size(); }
  const std::vector<double>& laplacian_symbol() const { return lap_; }
  bool has_drift() const { return n_ == 2; }

  void to_spectral(const std::vector<double>& f, std::vector<cplx>& out) { fft_.forward(f, out); }
  void to_physical(const std::vector<cplx>& in, std::vector<double>& out) { fft_.inverse(in, out); }

  // -sum_a d_a(f F_a), dealiased.
  void drift(const std::vector<cplx>& fh, std::vector<cplx>& out) {
    std::size_t R = fft_.real_size(), S = fft_.spectral_size();
    int d = 2 * n_;
    fft_.inverse(fh, phys_);
    out.assign(S, cplx(0.0));
    prod_.resize(R);
    for (int a = 0; a < d; ++a) {
      for (std::size_t r = 0; r < R; ++r) prod_[r] = phys_[r] * force_[a][r];
      fft_.forward(prod_, spec_);
      for (std::size_t s = 0; s < S; ++s) {
        if (!keep_[s]) continue;
        out[s] -= cplx(0.0, 2.0 * std::numbers::pi * wave_[s * d + a]) * spec_[s];
      }
    }
  }

 private:
  int m_, n_;
  RealFft fft_;
  std::vector<int> wave_;
  std::vector<unsigned char> keep_;
  std::vector<double> lap_;
  std::vector<std::vector<double>> force_;
  std::vector<double> phys_, prod_;
  std::vector<cplx> spec_;
};

}  // namespace

FpTrajectory solve_continuum_fp(const std::vector<double>& f0, int m, const std::vector<int>& signs,
                                const RegularizedPotential& p, double beta, double T, const FpOptions& opt) {
  check_signs(signs);
  if (m < 4 || m % 2 != 0) throw std::invalid_argument("solve_continuum_fp: grid must be even and >= 4");
  std::size_t R = 1;
  for (std::size_t i = 0; i < 2 * signs.size(); ++i) R *= static_cast<std::size_t>(m);
  if (f0.size() != R) throw std::invalid_argument("solve_continuum_fp: initial law size mismatch");
  if (!(T >= 0.0)) throw std::invalid_argument("solve_continuum_fp: T must be nonnegative");
  ContinuumFp sys(m, signs, p, beta);
  double dt = opt.dt > 0.0 ? opt.dt : 1e-3;
  std::vector<double> marks = sorted_marks(opt.snapshot_times, T);

  FpTrajectory tr;
  tr.dt = dt;
  tr.times.push_back(0.0);
  tr.states.push_back(f0);
  std::vector<cplx> y, n1, a, n2;
  sys.to_spectral(f0, y);
  std::size_t S = y.size();
  const auto& lap = sys.laplacian_symbol();
  std::vector<double> decay(S), phys;
  double t = 0.0;
  for (double mark : marks) {
    double seg = mark - t;
    if (seg <= 0.0) continue;
    long steps = static_cast<long>(std::ceil(seg / dt - 1e-9));
    double h = seg / steps;
    for (std::size_t i = 0; i < S; ++i) decay[i] = std::exp(lap[i] * h);
    for (long s = 0; s < steps; ++s) {
      if (sys.has_drift()) {
        sys.drift(y, n1);
        a.resize(S);
        for (std::size_t i = 0; i < S; ++i) a[i] = decay[i] * (y[i] + h * n1[i]);
        sys.drift(a, n2);
        for (std::size_t i = 0; i < S; ++i) y[i] = decay[i] * y[i] + 0.5 * h * (decay[i] * n1[i] + n2[i]);
      } else {
        for (std::size_t i = 0; i < S; ++i) y[i] *= decay[i];
      }
    }
    t = mark;
    sys.to_physical(y, phys);
    tr.times.push_back(t);
    tr.states.push_back(phys);
  }
  return tr;
}

std::vector<double> restrict_law(const std::vector<double>& f, int m, const LatticeStateSpace& space) {
  int n = space.lattice.size();
  if (m % n != 0) throw std::invalid_argument("restrict_law: lattice size must divide the grid");
  int r = m / n;
  std::size_t cells = static_cast<std::size_t>(m) * m;
  std::vector<double> out(space.states());
  for (std::size_t s = 0; s < out.size(); ++s) {
    auto x = space.decode(s);
    std::size_t idx = 0;
    for (const LatticeSite& l : x) idx = idx * cells + static_cast<std::size_t>(l.i1 * r) * m + l.i2 * r;
    out[s] = f.at(idx);
  }
  return out;
}

double l2_law_distance(const std::vector<double>& f, const std::vector<double>& g, const LatticeStateSpace& space) {
  if (f.size() != g.size() || f.size() != space.states()) throw std::invalid_argument("l2_law_distance: size mismatch");
  double w = std::pow(space.lattice.spacing(), 2 * space.particles);
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += (f[i] - g[i]) * (f[i] - g[i]);
  return std::sqrt(w * s);
}

}  // namespace dislab
