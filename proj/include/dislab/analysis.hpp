#pragma once

#include <functional>
#include <string>
#include <vector>

#include "dislab/potential.hpp"
#include "dislab/torus.hpp"

namespace dislab {

// Lattice state space of n <= 2 labelled particles; state index is
// site_index(x_0) * N^2 + site_index(x_1) for n = 2.
struct LatticeStateSpace {
  Lattice lattice{1};
  int particles = 1;

  std::size_t states() const;
  std::vector<LatticeSite> decode(std::size_t s) const;
  std::size_t encode(const std::vector<LatticeSite>& x) const;
  // State reached when `particle` moves one step in direction kDirections[dir].
  std::size_t neighbour(std::size_t s, int particle, int dir) const;
};

// Closed-form jets for the continuum generator.
struct Jet {
  double value = 0.0;
  std::vector<Vec2> grad;  // one per particle
  double laplacian = 0.0;  // full Laplacian on T^{2n}
};
using SmoothField = std::function<Jet(const std::vector<TorusPoint>&)>;

struct ForceJet {
  std::vector<Vec2> force;  // F_i, one per particle
  double divergence = 0.0;  // sum_i div_i F_i
};
using SmoothForce = std::function<ForceJet(const std::vector<TorusPoint>&)>;

// Rates (1/(beta eps^2)) exp(beta eps h.F/2) tabulated over a state space;
// the force is evaluated once per state.
class DiscreteGenerator {
 public:
  DiscreteGenerator(const LatticeStateSpace& space, const SmoothForce& force, double beta);
  const LatticeStateSpace& space() const { return space_; }
  // Adjoint (Fokker-Planck) form: sum_h [R_h(x - h) f(x - h) - R_h(x) f(x)].
  void apply_adjoint(const std::vector<double>& f, std::vector<double>& out) const;
  // Forward form: sum_h R_h(x) (g(x + h) - g(x)).
  void apply_forward(const std::vector<double>& g, std::vector<double>& out) const;
  // Largest total jump rate over the states.
  double max_exit_rate() const;

 private:
  LatticeStateSpace space_;
  int dirs_;
  std::vector<double> rates_;       // states x dirs
  std::vector<std::size_t> next_;   // states x dirs
};

std::vector<double> apply_discrete_generator(const std::vector<double>& f, const LatticeStateSpace& space,
                                             const SmoothForce& force, double beta);
std::vector<double> apply_forward_generator(const std::vector<double>& g, const LatticeStateSpace& space,
                                            const SmoothForce& force, double beta);

// -div(f F) + beta^-1 Lap f at one point.
double apply_continuum_generator(const SmoothField& f, const SmoothForce& force, double beta,
                                 const std::vector<TorusPoint>& x);
// Same, at every lattice state.
std::vector<double> apply_continuum_generator(const SmoothField& f, const SmoothForce& force, double beta,
                                              const LatticeStateSpace& space);

// Named one-particle test functions: constant, cos_mode (1 + cos(2 pi x1)/2),
// product (1 + cos(2 pi x1) cos(4 pi x2)/2), shifted (1 + sin(2 pi (x1 + 2 x2) + 0.3)/2).
SmoothField test_function(const std::string& id);
// Named one-particle forces: zero; shear (a sin(2 pi x2), a cos(2 pi x1)/2);
// pinned (-a grad V_delta(x - x0) with x0 = 0, needs p).
SmoothForce test_force(const std::string& id, double strength = 1.0, const RegularizedPotential* p = nullptr);
// Pairwise n-particle force F_i = -(b_i/n) sum_j b_j grad V(x_i - x_j), exact kernel.
SmoothForce pairwise_force(const RegularizedPotential& p, const std::vector<int>& signs);

struct GeneratorDefect {
  std::string test_function;
  std::vector<double> eps;
  std::vector<double> defects;  // sup over the lattice
  double order = 0.0;           // least-squares slope of log defect vs log eps
  double order_ci = 0.0;        // 95% half-width of the slope
};

// Throws for fewer than 3 spacings.
GeneratorDefect consistency_order(const SmoothField& f, const SmoothForce& force, const std::vector<double>& eps,
                                  double beta, int particles = 1, const std::string& label = "");
GeneratorDefect consistency_order(const std::string& f_id, const std::string& force_id,
                                  const std::vector<double>& eps, double beta, double delta,
                                  double strength = 1.0);

// (Omega*_eps f, f) / ||f||^2 in L^2(nu_eps). Throws on a zero field.
double stability_rayleigh(const std::vector<double>& f, const LatticeStateSpace& space, const SmoothForce& force,
                          double beta);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_ci = 0.0;  // 95% half-width, Student t
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace dislab
