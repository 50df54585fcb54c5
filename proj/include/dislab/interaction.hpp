#pragma once

#include <vector>

#include "dislab/densities.hpp"
#include "dislab/potential.hpp"
#include "dislab/torus.hpp"

namespace dislab {

// Off-lattice particle state. Signs are +1/-1 and never change along a trajectory.
struct SignedConfiguration {
  std::vector<TorusPoint> positions;
  std::vector<int> signs;
  std::size_t size() const { return positions.size(); }
};

struct LatticeConfiguration {
  Lattice lattice{1};
  std::vector<LatticeSite> sites;
  std::vector<int> signs;
  std::size_t size() const { return sites.size(); }
};

// Throws unless signs are +-1, sizes agree and n >= 1.
void validate(const SignedConfiguration& c);
void validate(const LatticeConfiguration& c);
int count_plus(const std::vector<int>& signs);

// V_delta and its derivatives at all lattice offsets, exact at the sites
// (obtained by folding the Fourier table modulo N).
class LatticeKernel {
 public:
  LatticeKernel(const RegularizedPotential& p, Lattice lat);
  const Lattice& lattice() const { return lattice_; }
  int size() const { return lattice_.size(); }

  std::size_t offset(LatticeSite a, LatticeSite b) const {
    int n = lattice_.size();
    return static_cast<std::size_t>(mod(a.i1 - b.i1, n)) * n + mod(a.i2 - b.i2, n);
  }
  double value(std::size_t off) const { return value_[off]; }
  Vec2 gradient(std::size_t off) const { return {grad1_[off], grad2_[off]}; }
  double laplacian(std::size_t off) const { return lap_[off]; }
  const std::vector<double>& grad1() const { return grad1_; }
  const std::vector<double>& grad2() const { return grad2_; }
  const std::vector<double>& values() const { return value_; }
  const std::vector<double>& laplacians() const { return lap_; }

 private:
  Lattice lattice_;
  std::vector<double> value_, grad1_, grad2_, lap_;
};

enum class KernelEval {
  exact,        // trigonometric sum, O(K^2) per pair
  interpolated  // bilinear grid lookup, O(1) per pair
};

// n^-2 sum_i sum_{j<i} b_i b_j V(x_i - x_j), exact kernel.
double energy(const SignedConfiguration& c, const RegularizedPotential& p);
double energy(const LatticeConfiguration& c, const LatticeKernel& k);

// F_i = -(b_i/n) sum_{j != i} b_j grad V(x_i - x_j).
std::vector<Vec2> particle_forces(const SignedConfiguration& c, const RegularizedPotential& p,
                                  KernelEval eval = KernelEval::exact);
void particle_forces(const SignedConfiguration& c, const RegularizedPotential& p, KernelEval eval,
                     std::vector<Vec2>& out);
std::vector<Vec2> particle_forces(const LatticeConfiguration& c, const LatticeKernel& k);

// F(., b; rho) = -b grad V * (rho+ - rho-). The lattice version is a discrete
// convolution with weights eps^2; the grid version multiplies spectra exactly.
ForceField mean_field_force(const LatticeDensityPair& rho, const LatticeKernel& k);
ForceField mean_field_force(const LatticeDensityPair& rho, const RegularizedPotential& p);
// Requires one of M_rho, M_P to divide the other.
ForceField mean_field_force(const GridDensityPair& rho, const RegularizedPotential& p);

}  // namespace dislab

#include "dislab/spectral.hpp"

namespace dislab {

// Reusable lattice convolution for repeated mean-field force evaluation.
class LatticeForceOperator {
 public:
  explicit LatticeForceOperator(const LatticeKernel& k);
  void apply(const std::vector<double>& plus, const std::vector<double>& minus, ForceField& out);
  int size() const { return n_; }

 private:
  int n_;
  RealFft fft_;
  std::vector<cplx> k1_, k2_, work_, s1_, s2_;
  std::vector<double> diff_;
};

// Spectral force multipliers on an M x M grid.
class GridForceOperator {
 public:
  GridForceOperator(const RegularizedPotential& p, int m);
  int grid() const { return m_; }
  // FFT of the +1 force components from the FFT of rho+ - rho- (half-spectrum layout).
  void force_spectra(const std::vector<cplx>& diff_hat, std::vector<cplx>& f1_hat,
                     std::vector<cplx>& f2_hat) const;
  const std::vector<cplx>& multiplier1() const { return m1_; }
  const std::vector<cplx>& multiplier2() const { return m2_; }

 private:
  int m_;
  std::vector<cplx> m1_, m2_;
};

}  // namespace dislab
