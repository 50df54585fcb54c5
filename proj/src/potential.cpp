#include "dislab/potential.hpp"

#include <bit>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "dislab/spectral.hpp"

namespace dislab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr char kMagic[8] = {'D', 'I', 'S', 'L', 'A', 'B', 'P', 'T'};
constexpr std::int64_t kCacheVersion = 1;

double mollifier_profile(Mollifier m, double r) {
  if (r >= 1.0) return 0.0;
  double s = 1.0 - r * r;
  switch (m) {
    case Mollifier::bump:
      return std::exp(-1.0 / s);
    case Mollifier::poly6:
      return s * s * s * s * s * s;
  }
  return 0.0;
}

// Composite Gauss-Legendre of 2 pi r phi(r) J0(2 pi xi r) over [0, 1].
double radial_integral(Mollifier m, double xi) {
  using Rule = boost::math::quadrature::gauss<double, 20>;
  const auto& x = Rule::abscissa();
  const auto& w = Rule::weights();
  int panels = 8 + 2 * static_cast<int>(std::ceil(xi));
  double width = 1.0 / panels;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    double mid = (p + 0.5) * width;
    double half = 0.5 * width;
    auto term = [&](double r) {
      double j0 = xi == 0.0 ? 1.0 : std::cyl_bessel_j(0.0, 2.0 * kPi * xi * r);
      return 2.0 * kPi * r * mollifier_profile(m, r) * j0;
    };
    // boost stores nonnegative abscissae; the zero node (odd order) is absent for N = 20.
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i] == 0.0) {
        s += w[i] * term(mid);
      } else {
        s += w[i] * (term(mid + half * x[i]) + term(mid - half * x[i]));
      }
    }
    total += half * s;
  }
  return total;
}

bool is_power_of_two(int m) { return m > 0 && (m & (m - 1)) == 0; }

template <class T>
void write_le(std::ostream& os, T v) {
  static_assert(std::endian::native == std::endian::little, "cache format assumes little-endian host");
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T read_le(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw std::runtime_error("potential cache: truncated file");
  return v;
}

}  // namespace

std::string to_string(Mollifier m) { return m == Mollifier::bump ? "bump" : "poly6"; }

Mollifier mollifier_from_string(const std::string& s) {
  if (s == "bump") return Mollifier::bump;
  if (s == "poly6") return Mollifier::poly6;
  throw std::invalid_argument("unknown mollifier '" + s + "' (expected bump or poly6)");
}

std::string to_string(GreenNormalization g) {
  return g == GreenNormalization::poisson ? "poisson" : "literal";
}

GreenNormalization green_from_string(const std::string& s) {
  if (s == "poisson") return GreenNormalization::poisson;
  if (s == "literal") return GreenNormalization::literal;
  throw std::invalid_argument("unknown green normalization '" + s + "'");
}

double green_coefficient(int k1, int k2) {
  if (k1 == 0 && k2 == 0) return 0.0;
  return -4.0 * kPi * kPi / (static_cast<double>(k1) * k1 + static_cast<double>(k2) * k2);
}

double poisson_green_coefficient(int k1, int k2) {
  if (k1 == 0 && k2 == 0) return 0.0;
  return 1.0 / (4.0 * kPi * kPi * (static_cast<double>(k1) * k1 + static_cast<double>(k2) * k2));
}

double green_coefficient(int k1, int k2, GreenNormalization g) {
  return g == GreenNormalization::poisson ? poisson_green_coefficient(k1, k2)
                                          : green_coefficient(k1, k2);
}

double mollifier_transform(Mollifier m, double xi) {
  // Mass is cached per mollifier; the quadrature is deterministic.
  static const double bump_mass = radial_integral(Mollifier::bump, 0.0);
  static const double poly_mass = radial_integral(Mollifier::poly6, 0.0);
  double mass = m == Mollifier::bump ? bump_mass : poly_mass;
  if (xi == 0.0) return 1.0;
  return radial_integral(m, std::abs(xi)) / mass;
}

int default_cutoff(double delta) { return static_cast<int>(std::ceil(8.0 / delta - 1e-9)); }

int default_grid(int cutoff) {
  int m = 1;
  while (m < 4 * cutoff) m *= 2;
  return m;
}

RegularizedPotential build_potential(const PotentialSpec& spec) {
  if (!(spec.delta > 0.0 && spec.delta <= 1.0)) {
    throw std::invalid_argument("build_potential: delta must lie in (0, 1]");
  }
  int k = spec.cutoff == 0 ? default_cutoff(spec.delta) : spec.cutoff;
  int min_k = static_cast<int>(std::ceil(4.0 / spec.delta - 1e-9));
  if (k < min_k) {
    throw std::invalid_argument("build_potential: cutoff K = " + std::to_string(k) +
                                " below ceil(4/delta) = " + std::to_string(min_k));
  }
  int m = spec.grid == 0 ? default_grid(k) : spec.grid;
  if (!is_power_of_two(m) || m < 4 * k) {
    throw std::invalid_argument("build_potential: grid M = " + std::to_string(m) +
                                " must be a power of two >= 4K = " + std::to_string(4 * k));
  }

  RegularizedPotential p;
  p.delta_ = spec.delta;
  p.cutoff_ = k;
  p.grid_ = m;
  p.mollifier_ = spec.mollifier;
  p.green_ = spec.green;

  // The transform is radial, so evaluate once per distinct |k|^2.
  std::map<long, double> by_radius;
  int width = 2 * k + 1;
  p.coeffs_.assign(static_cast<std::size_t>(width) * width, 0.0);
  for (int k1 = -k; k1 <= k; ++k1) {
    for (int k2 = -k; k2 <= k; ++k2) {
      if (k1 == 0 && k2 == 0) continue;
      long r2 = static_cast<long>(k1) * k1 + static_cast<long>(k2) * k2;
      auto it = by_radius.find(r2);
      if (it == by_radius.end()) {
        double phi = mollifier_transform(spec.mollifier, spec.delta * std::sqrt(static_cast<double>(r2)));
        it = by_radius.emplace(r2, phi).first;
      }
      p.coeffs_[static_cast<std::size_t>(k1 + k) * width + (k2 + k)] =
          green_coefficient(k1, k2, spec.green) * it->second;
    }
  }
  p.synthesize();
  return p;
}

void RegularizedPotential::synthesize() {
  int m = grid_;
  int k = cutoff_;
  RealFft fft({m, m});
  int hl = fft.half_last();
  std::size_t nspec = fft.spectral_size();
  std::vector<cplx> sv(nspec), s1(nspec), s2(nspec), sl(nspec);
  double scale = static_cast<double>(m) * m;
  for (int i1 = 0; i1 < m; ++i1) {
    int k1 = wavenumber(i1, m);
    if (std::abs(k1) > k) continue;
    for (int k2 = 0; k2 < hl && k2 <= k; ++k2) {
      double c = coeff(k1, k2) * scale;
      std::size_t idx = static_cast<std::size_t>(i1) * hl + k2;
      sv[idx] = c;
      s1[idx] = cplx(0.0, 2.0 * kPi * k1 * c);
      s2[idx] = cplx(0.0, 2.0 * kPi * k2 * c);
      sl[idx] = -4.0 * kPi * kPi * (static_cast<double>(k1) * k1 + static_cast<double>(k2) * k2) * c;
    }
  }
  fft.inverse(sv, value_);
  fft.inverse(s1, grad1_);
  fft.inverse(s2, grad2_);
  fft.inverse(sl, lap_);
  grad_interleaved_.resize(2 * value_.size());
  for (std::size_t i = 0; i < value_.size(); ++i) {
    grad_interleaved_[2 * i] = grad1_[i];
    grad_interleaved_[2 * i + 1] = grad2_[i];
  }
  for (double v : value_) {
    if (!std::isfinite(v)) throw std::runtime_error("potential synthesis produced non-finite samples");
  }
}

double RegularizedPotential::coeff(int k1, int k2) const {
  int k = cutoff_;
  if (std::abs(k1) > k || std::abs(k2) > k) return 0.0;
  return coeffs_[static_cast<std::size_t>(k1 + k) * (2 * k + 1) + (k2 + k)];
}

namespace {

struct TrigTable {
  std::vector<double> c1, s1, c2, s2;  // indexed by k + K
};

TrigTable trig_table(TorusPoint x, int k) {
  TrigTable t;
  int w = 2 * k + 1;
  t.c1.resize(w); t.s1.resize(w); t.c2.resize(w); t.s2.resize(w);
  for (int j = -k; j <= k; ++j) {
    double a = 2.0 * kPi * j * x.x1();
    double b = 2.0 * kPi * j * x.x2();
    t.c1[j + k] = std::cos(a); t.s1[j + k] = std::sin(a);
    t.c2[j + k] = std::cos(b); t.s2[j + k] = std::sin(b);
  }
  return t;
}

}  // namespace

double RegularizedPotential::value_at(TorusPoint x) const {
  int k = cutoff_, w = 2 * k + 1;
  TrigTable t = trig_table(x, k);
  double sum = 0.0;
  for (int a = 0; a < w; ++a) {
    const double* row = &coeffs_[static_cast<std::size_t>(a) * w];
    double acc = 0.0;
    for (int b = 0; b < w; ++b) acc += row[b] * (t.c1[a] * t.c2[b] - t.s1[a] * t.s2[b]);
    sum += acc;
  }
  return sum;
}

Vec2 RegularizedPotential::gradient_at(TorusPoint x) const {
  int k = cutoff_, w = 2 * k + 1;
  TrigTable t = trig_table(x, k);
  double g1 = 0.0, g2 = 0.0;
  for (int a = 0; a < w; ++a) {
    int k1 = a - k;
    const double* row = &coeffs_[static_cast<std::size_t>(a) * w];
    for (int b = 0; b < w; ++b) {
      int k2 = b - k;
      double s = t.s1[a] * t.c2[b] + t.c1[a] * t.s2[b];  // sin(2 pi k.x)
      g1 -= row[b] * 2.0 * kPi * k1 * s;
      g2 -= row[b] * 2.0 * kPi * k2 * s;
    }
  }
  return {g1, g2};
}

double RegularizedPotential::laplacian_at(TorusPoint x) const {
  int k = cutoff_, w = 2 * k + 1;
  TrigTable t = trig_table(x, k);
  double sum = 0.0;
  for (int a = 0; a < w; ++a) {
    int k1 = a - k;
    const double* row = &coeffs_[static_cast<std::size_t>(a) * w];
    for (int b = 0; b < w; ++b) {
      int k2 = b - k;
      double c = t.c1[a] * t.c2[b] - t.s1[a] * t.s2[b];
      sum -= row[b] * 4.0 * kPi * kPi * (k1 * k1 + k2 * k2) * c;
    }
  }
  return sum;
}

Vec2 RegularizedPotential::gradient_interpolated(Vec2 d) const {
  int m = grid_;
  double u = d.x1 * m, v = d.x2 * m;
  double fu = std::floor(u), fv = std::floor(v);
  double a = u - fu, b = v - fv;
  int i0 = mod(static_cast<int>(fu), m), j0 = mod(static_cast<int>(fv), m);
  int i1 = i0 + 1 == m ? 0 : i0 + 1, j1 = j0 + 1 == m ? 0 : j0 + 1;
  const double* g = grad_interleaved_.data();
  const double* p00 = g + 2 * (static_cast<std::size_t>(i0) * m + j0);
  const double* p01 = g + 2 * (static_cast<std::size_t>(i0) * m + j1);
  const double* p10 = g + 2 * (static_cast<std::size_t>(i1) * m + j0);
  const double* p11 = g + 2 * (static_cast<std::size_t>(i1) * m + j1);
  double w00 = (1 - a) * (1 - b), w01 = (1 - a) * b, w10 = a * (1 - b), w11 = a * b;
  return {w00 * p00[0] + w01 * p01[0] + w10 * p10[0] + w11 * p11[0],
          w00 * p00[1] + w01 * p01[1] + w10 * p10[1] + w11 * p11[1]};
}

double RegularizedPotential::value_interpolated(Vec2 d) const {
  int m = grid_;
  double u = d.x1 * m, v = d.x2 * m;
  double fu = std::floor(u), fv = std::floor(v);
  double a = u - fu, b = v - fv;
  int i0 = mod(static_cast<int>(fu), m), j0 = mod(static_cast<int>(fv), m);
  int i1 = i0 + 1 == m ? 0 : i0 + 1, j1 = j0 + 1 == m ? 0 : j0 + 1;
  auto at = [&](int i, int j) { return value_[static_cast<std::size_t>(i) * m + j]; };
  return (1 - a) * (1 - b) * at(i0, j0) + (1 - a) * b * at(i0, j1) + a * (1 - b) * at(i1, j0) +
         a * b * at(i1, j1);
}

std::variant<double, Vec2> eval_potential(const RegularizedPotential& p, TorusPoint x, int order) {
  switch (order) {
    case 0: return p.value_at(x);
    case 1: return p.gradient_at(x);
    case 2: return p.laplacian_at(x);
    default: throw std::invalid_argument("eval_potential: order must be 0, 1 or 2");
  }
}

double AssumptionReport::c_v() const { return c_v_upto(5); }

double AssumptionReport::c_v_upto(int order) const {
  double c = 0.0;
  for (int k = 0; k <= order && k < 6; ++k) {
    if (std::isfinite(constants[k])) c = std::max(c, constants[k]);
  }
  return c;
}

AssumptionReport verify_assumption(const RegularizedPotential& p) {
  int m = p.grid(), k = p.cutoff();
  RealFft fft({m, m});
  int hl = fft.half_last();
  double scale = static_cast<double>(m) * m;
  constexpr int kAngles = 96;
  AssumptionReport rep;
  std::vector<cplx> spec(fft.spectral_size());
  for (int order = 0; order <= 5; ++order) {
    // Components T_j = d1^{order-j} d2^j V.
    std::vector<std::vector<double>> comps(order + 1);
    for (int j = 0; j <= order; ++j) {
      std::fill(spec.begin(), spec.end(), cplx(0.0));
      for (int i1 = 0; i1 < m; ++i1) {
        int k1 = wavenumber(i1, m);
        if (std::abs(k1) > k) continue;
        for (int k2 = 0; k2 < hl && k2 <= k; ++k2) {
          cplx factor = std::pow(cplx(0.0, 2.0 * kPi), order) * std::pow(double(k1), order - j) *
                        std::pow(double(k2), j);
          spec[static_cast<std::size_t>(i1) * hl + k2] = factor * p.coeff(k1, k2) * scale;
        }
      }
      fft.inverse(spec, comps[j]);
    }
    std::vector<double> binom(order + 1, 1.0);
    for (int j = 1; j <= order; ++j) binom[j] = binom[j - 1] * (order - j + 1) / j;
    std::vector<std::vector<double>> basis(kAngles, std::vector<double>(order + 1));
    for (int a = 0; a < kAngles; ++a) {
      double th = kPi * a / kAngles;
      for (int j = 0; j <= order; ++j) {
        basis[a][j] = binom[j] * std::pow(std::cos(th), order - j) * std::pow(std::sin(th), j);
      }
    }
    double sup = 0.0;
    for (std::size_t i = 0; i < comps[0].size(); ++i) {
      for (int a = 0; a < (order == 0 ? 1 : kAngles); ++a) {
        double v = 0.0;
        for (int j = 0; j <= order; ++j) v += basis[a][j] * comps[j][i];
        sup = std::max(sup, std::abs(v));
      }
    }
    rep.sup_norms[order] = sup;
    if (order == 0) {
      double lg = std::log(1.0 / p.delta());
      rep.constants[0] = lg > 0.0 ? sup / lg : std::numeric_limits<double>::infinity();
    } else {
      rep.constants[order] = sup * std::pow(p.delta(), order);
    }
  }
  return rep;
}

void save_potential(const RegularizedPotential& p, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write potential cache " + path);
  os.write(kMagic, sizeof(kMagic));
  write_le<std::int64_t>(os, kCacheVersion);
  write_le<double>(os, p.delta());
  write_le<std::int64_t>(os, p.cutoff());
  write_le<std::int64_t>(os, p.grid());
  write_le<std::int64_t>(os, static_cast<std::int64_t>(p.mollifier()));
  write_le<std::int64_t>(os, static_cast<std::int64_t>(p.green()));
  for (double c : p.coeffs()) write_le(os, c);
  for (const auto* g : {&p.values(), &p.grad1(), &p.grad2(), &p.laplacian()}) {
    for (double v : *g) write_le(os, v);
  }
  if (!os) throw std::runtime_error("short write to potential cache " + path);
}

RegularizedPotential load_potential(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open potential cache " + path);
  char magic[8];
  is.read(magic, 8);
  if (!is || !std::equal(magic, magic + 8, kMagic)) {
    throw std::runtime_error("potential cache " + path + ": bad magic");
  }
  if (read_le<std::int64_t>(is) != kCacheVersion) {
    throw std::runtime_error("potential cache " + path + ": unsupported version");
  }
  RegularizedPotential p;
  p.delta_ = read_le<double>(is);
  p.cutoff_ = static_cast<int>(read_le<std::int64_t>(is));
  p.grid_ = static_cast<int>(read_le<std::int64_t>(is));
  p.mollifier_ = static_cast<Mollifier>(read_le<std::int64_t>(is));
  p.green_ = static_cast<GreenNormalization>(read_le<std::int64_t>(is));
  if (p.cutoff_ < 1 || p.grid_ < 4 * p.cutoff_) throw std::runtime_error("potential cache: bad header");
  std::size_t w = 2 * p.cutoff_ + 1;
  p.coeffs_.resize(w * w);
  for (double& c : p.coeffs_) c = read_le<double>(is);
  std::size_t n = static_cast<std::size_t>(p.grid_) * p.grid_;
  for (auto* g : {&p.value_, &p.grad1_, &p.grad2_, &p.lap_}) {
    g->resize(n);
    for (double& v : *g) v = read_le<double>(is);
  }
  p.grad_interleaved_.resize(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    p.grad_interleaved_[2 * i] = p.grad1_[i];
    p.grad_interleaved_[2 * i + 1] = p.grad2_[i];
  }
  return p;
}

RegularizedPotential cached_potential(const PotentialSpec& spec, const std::string& cache_dir) {
  if (cache_dir.empty()) return build_potential(spec);
  int k = spec.cutoff == 0 ? default_cutoff(spec.delta) : spec.cutoff;
  int m = spec.grid == 0 ? default_grid(k) : spec.grid;
  std::ostringstream name;
  name.precision(17);
  name << "potential_d" << spec.delta << "_K" << k << "_M" << m << "_" << to_string(spec.mollifier)
       << "_" << to_string(spec.green) << ".bin";
  std::filesystem::path path = std::filesystem::path(cache_dir) / name.str();
  if (std::filesystem::exists(path)) {
    RegularizedPotential p = load_potential(path.string());
    if (p.delta() == spec.delta && p.cutoff() == k && p.grid() == m) return p;
  }
  RegularizedPotential p = build_potential(spec);
  std::filesystem::create_directories(cache_dir);
  save_potential(p, path.string());
  return p;
}

}  // namespace dislab
