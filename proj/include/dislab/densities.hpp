#pragma once

#include <string>
#include <vector>

#include "dislab/torus.hpp"

namespace dislab {

// Densities of the two species w.r.t. the lattice volume measure eps^2 sum delta_l.
struct LatticeDensityPair {
  Lattice lattice{1};
  std::vector<double> plus;
  std::vector<double> minus;

  LatticeDensityPair() = default;
  explicit LatticeDensityPair(Lattice lat)
      : lattice(lat), plus(lat.sites(), 0.0), minus(lat.sites(), 0.0) {}

  double mass_plus() const;
  double mass_minus() const;
  double mass() const { return mass_plus() + mass_minus(); }
};

// Densities sampled at the points (i1/M, i2/M) of an M x M grid.
struct GridDensityPair {
  int grid = 0;
  std::vector<double> plus;
  std::vector<double> minus;

  GridDensityPair() = default;
  explicit GridDensityPair(int m)
      : grid(m), plus(static_cast<std::size_t>(m) * m, 0.0), minus(static_cast<std::size_t>(m) * m, 0.0) {}

  // Rectangle-rule masses, 1/M^2 sum.
  double mass_plus() const;
  double mass_minus() const;
  double mass() const { return mass_plus() + mass_minus(); }
};

// Named initial-condition presets.
//   uniform: f+ = mass_plus, f- = 1 - mass_plus
//   bumps:   one periodized Gaussian per sign, standard deviation `width`,
//            centred at center_plus / center_minus, species masses as above
struct InitialCondition {
  std::string family = "bumps";
  double mass_plus = 0.5;
  Vec2 center_plus{-0.25, 0.0};
  Vec2 center_minus{0.25, 0.0};
  double width = 0.15;
};

void validate(const InitialCondition& ic);
// Analytic density of one species at x.
double initial_density(const InitialCondition& ic, int sign, TorusPoint x);
GridDensityPair make_grid_density(const InitialCondition& ic, int m);
// Pointwise samples at lattice sites (not renormalized).
LatticeDensityPair make_lattice_density(const InitialCondition& ic, Lattice lat);

// Periodized isotropic Gaussian density with standard deviation sigma.
double periodic_gaussian(Vec2 d, double sigma);

// Mean-field force on +1 particles; F(., -1) = -F(., +1).
struct ForceField {
  int size = 0;  // N for lattice fields, M for grid fields
  std::vector<double> f1;
  std::vector<double> f2;

  Vec2 at(std::size_t idx, int sign) const {
    return sign > 0 ? Vec2{f1[idx], f2[idx]} : Vec2{-f1[idx], -f2[idx]};
  }
  // Bilinear interpolation in the periodic grid (grid fields only).
  Vec2 interpolate(TorusPoint x, int sign) const;
};

}  // namespace dislab
