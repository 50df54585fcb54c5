#pragma once

#include <string>
#include <utility>
#include <vector>

#include "dislab/densities.hpp"
#include "dislab/interaction.hpp"
#include "dislab/torus.hpp"

namespace dislab {

// Weighted atoms on the product of `components` tori; atom a occupies
// points[a*components .. a*components + components - 1].
struct AtomicMeasure {
  int components = 1;
  std::vector<TorusPoint> points;
  std::vector<double> weights;

  std::size_t atoms() const { return weights.size(); }
  double mass() const;
  void add(TorusPoint x, double w);
  void add(const std::vector<TorusPoint>& xs, double w);
};

// Sum over components of the torus distances.
double product_distance(const AtomicMeasure& a, std::size_t i, const AtomicMeasure& b, std::size_t j);

struct MetricReport {
  std::string metric;
  double value = 0.0;
  std::string method;       // exact-lp | flow | relaxed
  double err_factor = 1.0;  // true value lies in [value/err_factor, value]
  double wall_seconds = 0.0;
};

// Weight 1/n per particle, split by sign.
std::pair<AtomicMeasure, AtomicMeasure> empirical_measure(const SignedConfiguration& c);
std::pair<AtomicMeasure, AtomicMeasure> empirical_measure(const LatticeConfiguration& c);
// Atoms eps^2 f at the lattice sites.
std::pair<AtomicMeasure, AtomicMeasure> atomize(const LatticeDensityPair& rho);
// Cell masses aggregated to a coarse G x G grid, atoms at the block centres.
std::pair<AtomicMeasure, AtomicMeasure> atomize(const GridDensityPair& rho, int coarse);

struct L2Distance {
  double plus = 0.0;
  double minus = 0.0;
  double total = 0.0;  // root-sum-square
};
L2Distance l2_lattice_distance(const LatticeDensityPair& f, const LatticeDensityPair& g);

struct BlOptions {
  int exact_limit = 512;  // union supports up to this size use all pair constraints
  int neighbours = 16;    // initial k for the nearest-neighbour relaxation
  double max_err_factor = 1.4142135623730951;
  double tolerance = 1e-12;
};

// sup { int phi d(mu - nu) : sup|phi| + Lip(phi) <= 1 } on the union support.
MetricReport bl_dual_norm(const AtomicMeasure& mu, const AtomicMeasure& nu, const BlOptions& opt = {});
// Same, for a signed atomic measure given by one support and signed weights.
MetricReport bl_dual_norm_signed(const AtomicMeasure& support, const std::vector<double>& eta,
                                 const BlOptions& opt = {});

// Exact transport cost with ground cost = sum of per-component torus distances.
MetricReport w1_distance(const AtomicMeasure& mu, const AtomicMeasure& nu, int n_components = 1);

double mass_discrepancy(double mass_plus, int n_plus, int n);

}  // namespace dislab
