#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

namespace dislab {

struct Vec2 {
  double x1 = 0.0;
  double x2 = 0.0;

  Vec2 operator+(Vec2 o) const { return {x1 + o.x1, x2 + o.x2}; }
  Vec2 operator-(Vec2 o) const { return {x1 - o.x1, x2 - o.x2}; }
  Vec2 operator-() const { return {-x1, -x2}; }
  Vec2 operator*(double a) const { return {a * x1, a * x2}; }
  Vec2& operator+=(Vec2 o) { x1 += o.x1; x2 += o.x2; return *this; }
  Vec2& operator-=(Vec2 o) { x1 -= o.x1; x2 -= o.x2; return *this; }
  double dot(Vec2 o) const { return x1 * o.x1 + x2 * o.x2; }
  double norm() const { return std::hypot(x1, x2); }
  double operator[](int axis) const { return axis == 0 ? x1 : x2; }
};

// Shift a real coordinate by an integer into [-1/2, 1/2).
double wrap_coordinate(double x);

// A point of the unit torus, stored in the canonical cell [-1/2, 1/2)^2.
class TorusPoint {
 public:
  TorusPoint() = default;
  double x1() const { return x1_; }
  double x2() const { return x2_; }
  Vec2 vec() const { return {x1_, x2_}; }
  bool operator==(const TorusPoint&) const = default;

 private:
  friend TorusPoint wrap(double, double);
  double x1_ = 0.0;
  double x2_ = 0.0;
};

// Throws std::invalid_argument on non-finite input.
TorusPoint wrap(double x1, double x2);
inline TorusPoint wrap(Vec2 v) { return wrap(v.x1, v.x2); }

// Minimally wrapped difference x - y, each component in [-1/2, 1/2).
Vec2 torus_difference(TorusPoint x, TorusPoint y);
double torus_distance(TorusPoint x, TorusPoint y);

// Square lattice with spacing 1/size.
class Lattice {
 public:
  explicit Lattice(int size);
  // Rejects spacings whose reciprocal is not an integer (relative tolerance 1e-9).
  static Lattice from_spacing(double eps);

  int size() const { return size_; }
  double spacing() const { return 1.0 / size_; }
  std::size_t sites() const { return static_cast<std::size_t>(size_) * size_; }
  bool operator==(const Lattice&) const = default;

 private:
  int size_;
};

struct LatticeSite {
  int i1 = 0;
  int i2 = 0;
  bool operator==(const LatticeSite&) const = default;
};

// axis is 0 (e1) or 1 (e2); sign is +1 or -1.
struct Direction {
  int axis = 0;
  int sign = 1;
  Direction inverse() const { return {axis, -sign}; }
  bool operator==(const Direction&) const = default;
};

// Fixed enumeration used for rates and Poisson streams: +e1, -e1, +e2, -e2.
inline constexpr std::array<Direction, 4> kDirections{{{0, 1}, {0, -1}, {1, 1}, {1, -1}}};

inline int direction_index(Direction h) { return 2 * h.axis + (h.sign > 0 ? 0 : 1); }

inline int mod(int a, int n) {
  int r = a % n;
  return r < 0 ? r + n : r;
}

inline LatticeSite step(LatticeSite s, Direction h, int size) {
  if (h.axis == 0) return {mod(s.i1 + h.sign, size), s.i2};
  return {s.i1, mod(s.i2 + h.sign, size)};
}

inline std::size_t site_index(LatticeSite s, int size) {
  return static_cast<std::size_t>(s.i1) * size + s.i2;
}

inline LatticeSite site_from_index(std::size_t idx, int size) {
  return {static_cast<int>(idx / size), static_cast<int>(idx % size)};
}

TorusPoint site_position(LatticeSite s, int size);

// Lattice scalar field, row-major in (i1, i2).
struct LatticeField {
  Lattice lattice{1};
  std::vector<double> values;

  explicit LatticeField(Lattice lat, double fill = 0.0)
      : lattice(lat), values(lat.sites(), fill) {}
  double& operator()(LatticeSite s) { return values[site_index(s, lattice.size())]; }
  double operator()(LatticeSite s) const { return values[site_index(s, lattice.size())]; }
};

// (f(l + h) - f(l)) / eps with periodic wrap.
double finite_difference(const LatticeField& f, LatticeSite l, Direction h);

}  // namespace dislab
