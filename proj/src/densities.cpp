#include "dislab/densities.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace dislab {

namespace {
double lattice_mass(const std::vector<double>& f, const Lattice& lat) {
  double e = lat.spacing();
  return e * e * std::accumulate(f.begin(), f.end(), 0.0);
}
double grid_mass(const std::vector<double>& f, int m) {
  return std::accumulate(f.begin(), f.end(), 0.0) / (static_cast<double>(m) * m);
}
}  // namespace

double LatticeDensityPair::mass_plus() const { return lattice_mass(plus, lattice); }
double LatticeDensityPair::mass_minus() const { return lattice_mass(minus, lattice); }
double GridDensityPair::mass_plus() const { return grid_mass(plus, grid); }
double GridDensityPair::mass_minus() const { return grid_mass(minus, grid); }

double periodic_gaussian(Vec2 d, double sigma) {
  d = {wrap_coordinate(d.x1), wrap_coordinate(d.x2)};
  int r = static_cast<int>(std::ceil(8.0 * sigma)) + 1;
  double s2 = 2.0 * sigma * sigma;
  double sum = 0.0;
  for (int a = -r; a <= r; ++a) {
    double dx = d.x1 + a;
    double ex = std::exp(-dx * dx / s2);
    for (int b = -r; b <= r; ++b) {
      double dy = d.x2 + b;
      sum += ex * std::exp(-dy * dy / s2);
    }
  }
  return sum / (std::numbers::pi * s2);
}

void validate(const InitialCondition& ic) {
  if (!(ic.mass_plus >= 0.0 && ic.mass_plus <= 1.0)) {
    throw std::invalid_argument("initial condition: mass_plus must lie in [0, 1]");
  }
  if (ic.family == "uniform") return;
  if (ic.family == "bumps") {
    if (!(ic.width > 0.0 && ic.width <= 1.0)) {
      throw std::invalid_argument("initial condition: bump width must lie in (0, 1]");
    }
    return;
  }
  throw std::invalid_argument("unknown initial-condition family '" + ic.family + "'");
}

double initial_density(const InitialCondition& ic, int sign, TorusPoint x) {
  double mass = sign > 0 ? ic.mass_plus : 1.0 - ic.mass_plus;
  if (ic.family == "uniform") return mass;
  Vec2 c = sign > 0 ? ic.center_plus : ic.center_minus;
  return mass * periodic_gaussian(x.vec() - c, ic.width);
}

GridDensityPair make_grid_density(const InitialCondition& ic, int m) {
  validate(ic);
  GridDensityPair g(m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      TorusPoint x = wrap(static_cast<double>(i) / m, static_cast<double>(j) / m);
      std::size_t idx = static_cast<std::size_t>(i) * m + j;
      g.plus[idx] = initial_density(ic, +1, x);
      g.minus[idx] = initial_density(ic, -1, x);
    }
  }
  return g;
}

LatticeDensityPair make_lattice_density(const InitialCondition& ic, Lattice lat) {
  validate(ic);
  LatticeDensityPair f(lat);
  int n = lat.size();
  for (std::size_t idx = 0; idx < lat.sites(); ++idx) {
    TorusPoint x = site_position(site_from_index(idx, n), n);
    f.plus[idx] = initial_density(ic, +1, x);
    f.minus[idx] = initial_density(ic, -1, x);
  }
  return f;
}

Vec2 ForceField::interpolate(TorusPoint x, int sign) const {
  int m = size;
  double u = x.x1() * m, v = x.x2() * m;
  double fu = std::floor(u), fv = std::floor(v);
  double a = u - fu, b = v - fv;
  int i0 = mod(static_cast<int>(fu), m), j0 = mod(static_cast<int>(fv), m);
  int i1 = i0 + 1 == m ? 0 : i0 + 1, j1 = j0 + 1 == m ? 0 : j0 + 1;
  auto idx = [m](int i, int j) { return static_cast<std::size_t>(i) * m + j; };
  double w00 = (1 - a) * (1 - b), w01 = (1 - a) * b, w10 = a * (1 - b), w11 = a * b;
  Vec2 r{w00 * f1[idx(i0, j0)] + w01 * f1[idx(i0, j1)] + w10 * f1[idx(i1, j0)] + w11 * f1[idx(i1, j1)],
         w00 * f2[idx(i0, j0)] + w01 * f2[idx(i0, j1)] + w10 * f2[idx(i1, j0)] + w11 * f2[idx(i1, j1)]};
  return sign > 0 ? r : -r;
}

}  // namespace dislab
