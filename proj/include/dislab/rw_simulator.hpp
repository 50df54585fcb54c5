#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dislab/interaction.hpp"
#include "dislab/meanfield_lattice.hpp"
#include "dislab/rng.hpp"

namespace dislab {

enum class Scheduler { gillespie, time_change };
std::string to_string(Scheduler s);
Scheduler scheduler_from_string(const std::string& s);

struct RwEvent {
  double t;
  int particle;
  int axis;  // 0 or 1
  int sign;  // +1 or -1
};

struct RwTrajectory {
  std::vector<RwEvent> events;
  std::vector<double> snapshot_times;
  std::vector<LatticeConfiguration> snapshots;
  std::uint64_t seed = 0;
  Scheduler scheduler = Scheduler::gillespie;
};

// Arrival times of a unit-rate Poisson process, generated on demand and kept
// so a second process can replay them.
class PoissonStream {
 public:
  explicit PoissonStream(Rng rng) : rng_(std::move(rng)) {}
  // k-th arrival, k >= 1.
  double arrival(std::size_t k);

 private:
  Rng rng_;
  std::vector<double> arrivals_;
};

// 4n rates, entry 4 i + direction_index(h): (1/(beta eps^2)) exp(beta eps h_sign F_i[h_axis] / 2).
std::vector<double> jump_rates(const LatticeConfiguration& c, const LatticeKernel& k, double beta);
std::vector<double> jump_rates(const LatticeConfiguration& c, const RegularizedPotential& p, double beta, double eps);

// Snapshots are taken at the requested times in [0, T] (state after all events up to t).
RwTrajectory simulate_rw(const LatticeConfiguration& c0, const LatticeKernel& k, double beta, double T,
                         std::uint64_t seed, Scheduler scheduler, const std::vector<double>& snapshot_times = {});
RwTrajectory simulate_rw(const LatticeConfiguration& c0, const RegularizedPotential& p, double beta, double eps,
                         double T, std::uint64_t seed, Scheduler scheduler,
                         const std::vector<double>& snapshot_times = {});

struct CoupledRwResult {
  RwTrajectory x;
  RwTrajectory xbar;
  // Clock values and arrival counts per stream (4n entries) at each snapshot time.
  std::vector<std::vector<double>> tau, tau_bar;
  std::vector<std::vector<long>> count, count_bar;
};

// Both processes consume the same 4n Poisson streams. The auxiliary walk uses
// single-particle rates driven by the mean-field force, linear in time between
// stored snapshots, so its clocks are integrated in closed form.
CoupledRwResult simulate_coupled_rw(const LatticeConfiguration& c0, const MfeTrajectory& mfe,
                                    const LatticeKernel& k, double beta, double T, std::uint64_t seed,
                                    const std::vector<double>& snapshot_times);

// Sum over particles of the lattice torus distance between two configurations.
double total_displacement(const LatticeConfiguration& a, const LatticeConfiguration& b);

}  // namespace dislab
