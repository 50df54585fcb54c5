#include "dislab/torus.hpp"

#include <stdexcept>
#include <string>

namespace dislab {

double wrap_coordinate(double x) {
  double r = x - std::floor(x + 0.5);
  // floor() can land exactly on the excluded endpoint after rounding.
  if (r >= 0.5) r -= 1.0;
  if (r < -0.5) r += 1.0;
  return r;
}

TorusPoint wrap(double x1, double x2) {
  if (!std::isfinite(x1) || !std::isfinite(x2)) {
    throw std::invalid_argument("wrap: non-finite coordinate");
  }
  TorusPoint p;
  p.x1_ = wrap_coordinate(x1);
  p.x2_ = wrap_coordinate(x2);
  return p;
}

Vec2 torus_difference(TorusPoint x, TorusPoint y) {
  return {wrap_coordinate(x.x1() - y.x1()), wrap_coordinate(x.x2() - y.x2())};
}

double torus_distance(TorusPoint x, TorusPoint y) { return torus_difference(x, y).norm(); }

Lattice::Lattice(int size) : size_(size) {
  if (size < 1) throw std::invalid_argument("lattice size must be a positive integer");
}

Lattice Lattice::from_spacing(double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) {
    throw std::invalid_argument("lattice spacing must be positive and finite");
  }
  double inv = 1.0 / eps;
  double rounded = std::round(inv);
  if (rounded < 1.0 || std::abs(inv - rounded) > 1e-9 * rounded) {
    throw std::invalid_argument("1/eps = " + std::to_string(inv) + " is not a positive integer");
  }
  return Lattice(static_cast<int>(rounded));
}

TorusPoint site_position(LatticeSite s, int size) {
  double eps = 1.0 / size;
  return wrap(eps * s.i1, eps * s.i2);
}

double finite_difference(const LatticeField& f, LatticeSite l, Direction h) {
  int n = f.lattice.size();
  return (f(step(l, h, n)) - f(l)) * n;
}

}  // namespace dislab
