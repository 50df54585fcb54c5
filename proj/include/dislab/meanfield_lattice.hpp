#pragma once

#include <cstdint>
#include <vector>

#include "dislab/densities.hpp"
#include "dislab/interaction.hpp"

namespace dislab {

enum class Stepper { rk4, euler };

// Right-hand side of the lattice mean-field system for fixed (P, lattice, beta).
class MfeSystem {
 public:
  MfeSystem(const RegularizedPotential& p, Lattice lat, double beta);

  const Lattice& lattice() const { return lattice_; }
  double beta() const { return beta_; }
  // Largest step accepted by solve_mfe: 0.25 beta eps^2 exp(-beta eps sup|grad V| / 2).
  double max_stable_step() const;

  void rhs(const LatticeDensityPair& rho, LatticeDensityPair& out);
  // Force of the last rhs() call.
  const ForceField& last_force() const { return force_; }
  // Force for a given state.
  void force(const LatticeDensityPair& rho, ForceField& out);

 private:
  void species_rhs(const std::vector<double>& f, int sign, std::vector<double>& out);

  Lattice lattice_;
  double beta_;
  double grad_sup_;
  LatticeKernel kernel_;
  LatticeForceOperator op_;
  ForceField force_;
  std::vector<double> flux_[4];
};

LatticeDensityPair mfe_rhs(const LatticeDensityPair& rho, const RegularizedPotential& p, double beta);

struct MfeOptions {
  double dt = 0.0;  // 0: largest stable step
  Stepper stepper = Stepper::rk4;
  int snapshot_every = 1;             // used when snapshot_times is empty
  std::vector<double> snapshot_times;  // exact output times in (0, T]
};

struct MfeTrajectory {
  std::vector<double> times;
  std::vector<LatticeDensityPair> states;
  double dt = 0.0;
  // Lattice-field interpolation of the +1 force between snapshots.
  std::vector<ForceField> forces;
};

// Throws on mass drift beyond 1e-9, densities below -1e-10, non-finite values,
// or a step above max_stable_step(). Mass is never renormalized.
MfeTrajectory solve_mfe(const LatticeDensityPair& rho0, const RegularizedPotential& p, double beta,
                        double T, const MfeOptions& opt = {});
MfeTrajectory solve_mfe(const LatticeDensityPair& rho0, MfeSystem& sys, double T, const MfeOptions& opt = {});

struct SamplingOptions {
  int n_plus = 0;
  int n_minus = 0;
  // Draw the number of +1 particles as Binomial(n_plus + n_minus, mass+/mass).
  bool random_signs = false;
};

LatticeConfiguration sample_particles(const LatticeDensityPair& rho, const SamplingOptions& opt,
                                      std::uint64_t seed);
// Off-lattice: cell chosen by inverse CDF, then uniform inside the grid cell
// centred at the sample point.
SignedConfiguration sample_particles(const GridDensityPair& rho, const SamplingOptions& opt,
                                     std::uint64_t seed);

}  // namespace dislab
