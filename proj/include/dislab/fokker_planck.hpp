#pragma once

#include <vector>

#include "dislab/analysis.hpp"
#include "dislab/densities.hpp"
#include "dislab/potential.hpp"

namespace dislab {

// Laws of the n-particle models (n <= 2) as densities on the product space.
struct FpTrajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> states;  // density w.r.t. the product volume measure
  double dt = 0.0;
};

struct FpOptions {
  double dt = 0.0;                     // 0: automatic
  std::vector<double> snapshot_times;  // in (0, T]; T is always recorded
};

// Product of the normalized single-species initial densities, sampled at the
// lattice states (not renormalized).
std::vector<double> product_initial_law(const InitialCondition& ic, const std::vector<int>& signs,
                                        const LatticeStateSpace& space);
// Same on the m^(2n) grid, points (i/m) per coordinate, row-major over
// (x_0^1, x_0^2, x_1^1, x_1^2).
std::vector<double> product_initial_law(const InitialCondition& ic, const std::vector<int>& signs, int m);

// 0.1 / (largest exit rate), accurate for point-mass initial laws.
// 1.4 / (largest exit rate), inside the RK4 stability interval.
FpTrajectory solve_discrete_fp(const std::vector<double>& f0, const LatticeStateSpace& space,
                               const std::vector<int>& signs, const RegularizedPotential& p, double beta, double T,
                               const FpOptions& opt = {});

// Fokker-Planck equation of the diffusion on the m^(2n) grid: pseudo-spectral,
// diffusion integrated exactly, drift by Heun. Automatic dt is 1e-3.
FpTrajectory solve_continuum_fp(const std::vector<double>& f0, int m, const std::vector<int>& signs,
                                const RegularizedPotential& p, double beta, double T, const FpOptions& opt = {});

// Samples of a grid law at the lattice states; requires 1/eps to divide m.
std::vector<double> restrict_law(const std::vector<double>& f, int m, const LatticeStateSpace& space);

// sqrt(eps^(2n) sum (f - g)^2).
double l2_law_distance(const std::vector<double>& f, const std::vector<double>& g, const LatticeStateSpace& space);

}  // namespace dislab
