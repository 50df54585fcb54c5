#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "dislab/interaction.hpp"
#include "dislab/meanfield_continuum.hpp"
#include "dislab/rng.hpp"

namespace dislab {

struct SdeOptions {
  KernelEval eval = KernelEval::interpolated;
  // Output times; each must be a multiple of dt or equal to T. Empty: every step.
  std::vector<double> snapshot_times;
  // Noise stream id of each particle (default: its index). Permuting ids together
  // with the particles permutes the output.
  std::vector<std::uint64_t> stream_ids;
};

struct SdeTrajectory {
  std::vector<double> times;
  std::vector<SignedConfiguration> snapshots;
  double dt = 0.0;
  std::uint64_t seed = 0;
  // Coupled runs only: auxiliary configurations and the unwrapped X_i - Xbar_i.
  std::vector<SignedConfiguration> aux;
  std::vector<std::vector<Vec2>> displacement;
};

// min(1e-3, delta^2 / (10 c beta)) with c = sup|d^2 V| delta^2, the drift Lipschitz scale.
double default_sde_step(const AssumptionReport& a, double delta, double beta);

// x_i <- wrap(x_i + F_i dt + sqrt(2 dt / beta) xi_i). beta = +inf disables the noise.
SignedConfiguration em_step(const SignedConfiguration& c, const RegularizedPotential& p, double beta, double dt,
                            const std::vector<Vec2>& xi, KernelEval eval = KernelEval::exact);

SdeTrajectory simulate_sde(const SignedConfiguration& c0, const RegularizedPotential& p, double beta, double T,
                           double dt, std::uint64_t seed, const SdeOptions& opt = {});

// X follows the pairwise drift, Xbar the mean-field force of `mf` (bilinear in
// space, linear in time between stored forces); both see the same increments.
SdeTrajectory simulate_coupled_sde(const SignedConfiguration& c0, const MfTrajectory& mf,
                                   const RegularizedPotential& p, double beta, double T, double dt,
                                   std::uint64_t seed, const SdeOptions& opt = {});

// Mean over particles of |X_i - Xbar_i| at each snapshot.
std::vector<double> mean_coupling_distance(const SdeTrajectory& tr);

}  // namespace dislab
