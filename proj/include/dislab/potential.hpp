#pragma once

#include <array>
#include <string>
#include <variant>
#include <vector>

#include "dislab/torus.hpp"

namespace dislab {

enum class Mollifier {
  bump,   // exp(-1/(1-r^2)) on the unit disk
  poly6,  // (1-r^2)^6 on the unit disk, C^5 at the rim
};

// How the Green function's Fourier coefficient is normalized.
//   poisson:       1/(4 pi^2 |k|^2), the solution of -Lap V = delta_0 - 1
//   literal:       -4 pi^2/|k|^2 taken at face value (see green_coefficient)
enum class GreenNormalization { poisson, literal };

std::string to_string(Mollifier m);
Mollifier mollifier_from_string(const std::string& s);
std::string to_string(GreenNormalization g);
GreenNormalization green_from_string(const std::string& s);

// -4 pi^2/|k|^2 for k != 0, zero for k = 0.
double green_coefficient(int k1, int k2);
// 1/(4 pi^2 |k|^2) for k != 0, zero for k = 0.
double poisson_green_coefficient(int k1, int k2);
double green_coefficient(int k1, int k2, GreenNormalization g);

// Fourier transform of the unit-mass mollifier of radius 1 at radial
// frequency xi (cycles per unit length). phi_delta^(k) = this at delta*|k|.
double mollifier_transform(Mollifier m, double xi);

struct PotentialSpec {
  double delta = 0.25;
  Mollifier mollifier = Mollifier::bump;
  int cutoff = 0;  // 0: default ceil(8/delta)
  int grid = 0;    // 0: smallest power of two >= 4*cutoff
  GreenNormalization green = GreenNormalization::poisson;
};

int default_cutoff(double delta);
int default_grid(int cutoff);

class RegularizedPotential {
 public:
  double delta() const { return delta_; }
  int cutoff() const { return cutoff_; }
  int grid() const { return grid_; }
  Mollifier mollifier() const { return mollifier_; }
  GreenNormalization green() const { return green_; }

  // Zero outside the retained band |k|_inf <= K.
  double coeff(int k1, int k2) const;
  // Row-major table over k1, k2 in [-K, K].
  const std::vector<double>& coeffs() const { return coeffs_; }

  // Real-space samples on the M x M grid; entry (i1, i2) is the value at (i1/M, i2/M).
  const std::vector<double>& values() const { return value_; }
  const std::vector<double>& grad1() const { return grad1_; }
  const std::vector<double>& grad2() const { return grad2_; }
  const std::vector<double>& laplacian() const { return lap_; }

  // Exact trigonometric sums over the retained modes; cost O(K^2).
  double value_at(TorusPoint x) const;
  Vec2 gradient_at(TorusPoint x) const;
  double laplacian_at(TorusPoint x) const;

  // Bilinear lookup in the sample grid, for bulk use. Accepts any real
  // displacement. Error is at most (h^2/4) sup|d^3 V_delta| with h = 1/M.
  Vec2 gradient_interpolated(Vec2 d) const;
  double value_interpolated(Vec2 d) const;

 private:
  friend RegularizedPotential build_potential(const PotentialSpec&);
  friend RegularizedPotential load_potential(const std::string&);
  void synthesize();

  double delta_ = 0;
  int cutoff_ = 0;
  int grid_ = 0;
  Mollifier mollifier_ = Mollifier::bump;
  GreenNormalization green_ = GreenNormalization::poisson;
  std::vector<double> coeffs_;
  std::vector<double> value_, grad1_, grad2_, lap_;
  std::vector<double> grad_interleaved_;
};

// Throws std::invalid_argument for delta outside (0, 1], K < ceil(4/delta),
// or M not a power of two >= 4K.
RegularizedPotential build_potential(const PotentialSpec& spec);

// order 0: value (double), 1: gradient (Vec2), 2: Laplacian (double).
std::variant<double, Vec2> eval_potential(const RegularizedPotential& p, TorusPoint x, int order);

struct AssumptionReport {
  // sup |d^k V_delta| for k = 0..5 (operator norm of the symmetric k-tensor).
  std::array<double, 6> sup_norms{};
  // k = 0: sup|V|/log(1/delta); k >= 1: sup|d^k V| delta^k.
  std::array<double, 6> constants{};
  // Max over the finite entries of constants.
  double c_v() const;
  // Same over orders 0..order only; the mean-field estimates need order <= 2.
  double c_v_upto(int order) const;
};

AssumptionReport verify_assumption(const RegularizedPotential& p);

// Flat little-endian cache: magic, version, delta, K, M, mollifier id,
// normalization id, then coefficients and the four sample grids.
void save_potential(const RegularizedPotential& p, const std::string& path);
RegularizedPotential load_potential(const std::string& path);

// Loads from `cache_dir` when a matching file exists, otherwise builds and
// stores it there. An empty cache_dir disables caching.
RegularizedPotential cached_potential(const PotentialSpec& spec, const std::string& cache_dir);

}  // namespace dislab
