#pragma once

#include <vector>

#include "dislab/densities.hpp"
#include "dislab/interaction.hpp"
#include "dislab/spectral.hpp"

namespace dislab {

// Pseudo-spectral right-hand side of the continuum mean-field equation on an M x M grid.
class MfSystem {
 public:
  MfSystem(const RegularizedPotential& p, int m, double beta, bool force_enabled = true);

  int grid() const { return m_; }
  double beta() const { return beta_; }

  // Spectra use the RealFft half layout (FFT of the samples, unnormalized).
  void to_spectral(const GridDensityPair& rho, std::vector<cplx>& plus, std::vector<cplx>& minus);
  void to_physical(const std::vector<cplx>& plus, const std::vector<cplx>& minus, GridDensityPair& rho);
  // Advection part -div(rho F), 2/3-dealiased.
  void advection(const std::vector<cplx>& plus, const std::vector<cplx>& minus, std::vector<cplx>& dplus,
                 std::vector<cplx>& dminus);
  // Fourier multiplier of beta^-1 Lap for the given half-spectrum index.
  const std::vector<double>& laplacian_symbol() const { return lap_; }
  void force(const std::vector<cplx>& plus, const std::vector<cplx>& minus, ForceField& out);
  bool force_enabled() const { return force_enabled_; }
  RealFft& fft() { return fft_; }

 private:
  int m_;
  double beta_;
  bool force_enabled_;
  RealFft fft_;
  GridForceOperator op_;
  std::vector<double> lap_;       // -|2 pi k|^2 / beta
  std::vector<unsigned char> keep_;  // 2/3-rule mask
  std::vector<cplx> diff_, f1h_, f2h_, tmp_, acc_;
  std::vector<double> f1_, f2_, rho_, prod_;
};

GridDensityPair mf_rhs(const GridDensityPair& rho, const RegularizedPotential& p, double beta);

struct MfOptions {
  double dt = 1e-3;
  bool force_enabled = true;
  int snapshot_every = 1;
  std::vector<double> snapshot_times;
  bool store_forces = false;
};

struct MfTrajectory {
  std::vector<double> times;
  std::vector<GridDensityPair> states;
  std::vector<ForceField> forces;  // only with store_forces
  double dt = 0.0;
};

// Integrating-factor Heun: diffusion exact per step, advection explicit.
MfTrajectory solve_mf(const GridDensityPair& rho0, const RegularizedPotential& p, double beta, double T,
                      const MfOptions& opt = {});

// Torus heat kernel at time t on an M x M grid; grid mass 1.
std::vector<double> heat_kernel(double beta, double t, int m);

struct GradientL1 {
  double component_sum;  // mean over grid of |d1 Phi| + |d2 Phi|
  double euclidean;      // mean of |grad Phi|
  double single_partial; // mean of |d1 Phi|
};
GradientL1 heat_kernel_gradient_l1(double beta, double t, int m);

// Pointwise samples at lattice sites; requires 1/eps to divide M. Not renormalized.
LatticeDensityPair restrict_to_lattice(const GridDensityPair& rho, double eps);
// Trigonometric interpolation of lattice samples onto an M x M grid (M a multiple of N).
GridDensityPair interpolate_to_grid(const LatticeDensityPair& rho, int m);

}  // namespace dislab
