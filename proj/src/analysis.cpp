#include "dislab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

namespace dislab {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}  // namespace

std::size_t LatticeStateSpace::states() const {
  if (particles < 1 || particles > 2) throw std::invalid_argument("state space supports 1 or 2 particles");
  std::size_t s = lattice.sites();
  return particles == 1 ? s : s * s;
}

std::vector<LatticeSite> LatticeStateSpace::decode(std::size_t s) const {
  int n = lattice.size();
  if (particles == 1) return {site_from_index(s, n)};
  std::size_t m = lattice.sites();
  return {site_from_index(s / m, n), site_from_index(s % m, n)};
}

std::size_t LatticeStateSpace::encode(const std::vector<LatticeSite>& x) const {
  int n = lattice.size();
  if (particles == 1) return site_index(x[0], n);
  return site_index(x[0], n) * lattice.sites() + site_index(x[1], n);
}

std::size_t LatticeStateSpace::neighbour(std::size_t s, int particle, int dir) const {
  auto x = decode(s);
  x[particle] = step(x[particle], kDirections[dir], lattice.size());
  return encode(x);
}

namespace {

std::vector<TorusPoint> positions(const LatticeStateSpace& space, std::size_t s) {
  std::vector<TorusPoint> out;
  for (const LatticeSite& l : space.decode(s)) out.push_back(site_position(l, space.lattice.size()));
  return out;
}

}  // namespace

DiscreteGenerator::DiscreteGenerator(const LatticeStateSpace& space, const SmoothForce& force, double beta)
    : space_(space), dirs_(4 * space.particles) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw std::invalid_argument("generator: beta must be positive");
  std::size_t S = space.states();
  double e = space.lattice.spacing();
  double base = 1.0 / (beta * e * e), half = 0.5 * beta * e;
  rates_.resize(S * dirs_);
  next_.resize(S * dirs_);
  for (std::size_t s = 0; s < S; ++s) {
    ForceJet fj = force(positions(space, s));
    for (int i = 0; i < space.particles; ++i) {
      for (int d = 0; d < 4; ++d) {
        const Direction& h = kDirections[d];
        std::size_t k = s * dirs_ + 4 * i + d;
        rates_[k] = base * std::exp(half * h.sign * fj.force[i][h.axis]);
        next_[k] = space.neighbour(s, i, d);
      }
    }
  }
}

void DiscreteGenerator::apply_adjoint(const std::vector<double>& f, std::vector<double>& out) const {
  std::size_t S = space_.states();
  if (f.size() != S) throw std::invalid_argument("generator: field size mismatch");
  out.assign(S, 0.0);
  // Scatter form: mass R_h(x) f(x) leaves x and arrives at x + h.
  for (std::size_t s = 0; s < S; ++s) {
    double fs = f[s];
    for (int d = 0; d < dirs_; ++d) {
      double flow = rates_[s * dirs_ + d] * fs;
      out[next_[s * dirs_ + d]] += flow;
      out[s] -= flow;
    }
  }
}

void DiscreteGenerator::apply_forward(const std::vector<double>& g, std::vector<double>& out) const {
  std::size_t S = space_.states();
  if (g.size() != S) throw std::invalid_argument("generator: field size mismatch");
  out.assign(S, 0.0);
  for (std::size_t s = 0; s < S; ++s) {
    double acc = 0.0;
    for (int d = 0; d < dirs_; ++d) acc += rates_[s * dirs_ + d] * (g[next_[s * dirs_ + d]] - g[s]);
    out[s] = acc;
  }
}

double DiscreteGenerator::max_exit_rate() const {
  double best = 0.0;
  for (std::size_t s = 0; s < space_.states(); ++s) {
    double t = 0.0;
    for (int d = 0; d < dirs_; ++d) t += rates_[s * dirs_ + d];
    best = std::max(best, t);
  }
  return best;
}

std::vector<double> apply_discrete_generator(const std::vector<double>& f, const LatticeStateSpace& space,
                                             const SmoothForce& force, double beta) {
  std::vector<double> out;
  DiscreteGenerator(space, force, beta).apply_adjoint(f, out);
  return out;
}

std::vector<double> apply_forward_generator(const std::vector<double>& g, const LatticeStateSpace& space,
                                            const SmoothForce& force, double beta) {
  std::vector<double> out;
  DiscreteGenerator(space, force, beta).apply_forward(g, out);
  return out;
}

double apply_continuum_generator(const SmoothField& f, const SmoothForce& force, double beta,
                                 const std::vector<TorusPoint>& x) {
  Jet j = f(x);
  ForceJet fj = force(x);
  double adv = j.value * fj.divergence;
  for (std::size_t i = 0; i < x.size(); ++i) adv += j.grad[i].dot(fj.force[i]);
  double diff = std::isinf(beta) ? 0.0 : j.laplacian / beta;
  return -adv + diff;
}

std::vector<double> apply_continuum_generator(const SmoothField& f, const SmoothForce& force, double beta,
                                              const LatticeStateSpace& space) {
  std::vector<double> out(space.states());
  for (std::size_t s = 0; s < out.size(); ++s) out[s] = apply_continuum_generator(f, force, beta, positions(space, s));
  return out;
}

SmoothField test_function(const std::string& id) {
  if (id == "constant") {
    return [](const std::vector<TorusPoint>& x) { return Jet{1.0, std::vector<Vec2>(x.size()), 0.0}; };
  }
  if (id == "cos_mode") {
    return [](const std::vector<TorusPoint>& x) {
      double a = kTwoPi * x[0].x1();
      return Jet{1.0 + 0.5 * std::cos(a), {{-kPi * std::sin(a), 0.0}}, -2.0 * kPi * kPi * std::cos(a)};
    };
  }
  if (id == "product") {
    return [](const std::vector<TorusPoint>& x) {
      double a = kTwoPi * x[0].x1(), b = 2.0 * kTwoPi * x[0].x2();
      double ca = std::cos(a), cb = std::cos(b);
      return Jet{1.0 + 0.5 * ca * cb,
                 {{-kPi * std::sin(a) * cb, -kTwoPi * ca * std::sin(b)}},
                 -10.0 * kPi * kPi * ca * cb};
    };
  }
  if (id == "shifted") {
    return [](const std::vector<TorusPoint>& x) {
      double th = kTwoPi * (x[0].x1() + 2.0 * x[0].x2()) + 0.3;
      double c = std::cos(th);
      return Jet{1.0 + 0.5 * std::sin(th), {{kPi * c, kTwoPi * c}}, -10.0 * kPi * kPi * std::sin(th)};
    };
  }
  throw std::invalid_argument("unknown test function '" + id + "'");
}

SmoothForce test_force(const std::string& id, double strength, const RegularizedPotential* p) {
  double a = strength;
  if (id == "zero") {
    return [](const std::vector<TorusPoint>& x) { return ForceJet{std::vector<Vec2>(x.size()), 0.0}; };
  }
  if (id == "shear") {
    return [a](const std::vector<TorusPoint>& x) {
      return ForceJet{{{a * std::sin(kTwoPi * x[0].x2()), 0.5 * a * std::cos(kTwoPi * x[0].x1())}}, 0.0};
    };
  }
  if (id == "smooth") {
    return [a](const std::vector<TorusPoint>& x) {
      double u = kTwoPi * x[0].x1() + 0.4, v = kTwoPi * x[0].x2();
      Vec2 f{a * std::sin(u), a * (0.5 * std::cos(v) + 0.2)};
      return ForceJet{{f}, a * (kTwoPi * std::cos(u) - kPi * std::sin(v))};
    };
  }
  if (id == "pinned") {
    if (!p) throw std::invalid_argument("pinned force needs a potential");
    return [a, p](const std::vector<TorusPoint>& x) {
      return ForceJet{{p->gradient_at(x[0]) * (-a)}, -a * p->laplacian_at(x[0])};
    };
  }
  throw std::invalid_argument("unknown force '" + id + "'");
}

SmoothForce pairwise_force(const RegularizedPotential& p, const std::vector<int>& signs) {
  return [&p, signs](const std::vector<TorusPoint>& x) {
    std::size_t n = x.size();
    if (signs.size() != n) throw std::invalid_argument("pairwise_force: sign count mismatch");
    ForceJet out{std::vector<Vec2>(n), 0.0};
    double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        TorusPoint d = wrap(x[i].vec() - x[j].vec());
        double w = signs[i] * signs[j] * inv_n;
        out.force[i] -= p.gradient_at(d) * w;
        out.divergence -= w * p.laplacian_at(d);
      }
    }
    return out;
  };
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  std::size_t m = x.size();
  if (m < 2 || y.size() != m) throw std::invalid_argument("fit_line: need at least two points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < m; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= m;
  my /= m;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0)) throw std::invalid_argument("fit_line: degenerate abscissae");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (m > 2) {
    double ssr = 0;
    for (std::size_t i = 0; i < m; ++i) {
      double r = y[i] - fit.intercept - fit.slope * x[i];
      ssr += r * r;
    }
    double se = std::sqrt(ssr / (m - 2) / sxx);
    boost::math::students_t dist(static_cast<double>(m - 2));
    fit.slope_ci = boost::math::quantile(boost::math::complement(dist, 0.025)) * se;
  }
  return fit;
}

GeneratorDefect consistency_order(const SmoothField& f, const SmoothForce& force, const std::vector<double>& eps,
                                  double beta, int particles, const std::string& label) {
  if (eps.size() < 3) throw std::invalid_argument("consistency_order: need at least 3 spacings");
  GeneratorDefect out;
  out.test_function = label;
  std::vector<double> lx, ly;
  for (double e : eps) {
    LatticeStateSpace space{Lattice::from_spacing(e), particles};
    std::vector<double> fv(space.states());
    for (std::size_t s = 0; s < fv.size(); ++s) fv[s] = f(positions(space, s)).value;
    auto d = apply_discrete_generator(fv, space, force, beta);
    auto c = apply_continuum_generator(f, force, beta, space);
    double sup = 0.0;
    for (std::size_t s = 0; s < d.size(); ++s) sup = std::max(sup, std::abs(d[s] - c[s]));
    out.eps.push_back(e);
    out.defects.push_back(sup);
    if (sup > 0.0) {
      lx.push_back(std::log(e));
      ly.push_back(std::log(sup));
    }
  }
  if (lx.size() >= 2) {
    LineFit fit = fit_line(lx, ly);
    out.order = fit.slope;
    out.order_ci = fit.slope_ci;
  }
  return out;
}

GeneratorDefect consistency_order(const std::string& f_id, const std::string& force_id,
                                  const std::vector<double>& eps, double beta, double delta, double strength) {
  RegularizedPotential p = build_potential(PotentialSpec{delta});
  return consistency_order(test_function(f_id), test_force(force_id, strength, &p), eps, beta, 1, f_id);
}

double stability_rayleigh(const std::vector<double>& f, const LatticeStateSpace& space, const SmoothForce& force,
                          double beta) {
  double ff = 0.0;
  for (double v : f) ff += v * v;
  if (!(ff > 0.0)) throw std::invalid_argument("stability_rayleigh: zero field");
  auto g = apply_discrete_generator(f, space, force, beta);
  double gf = 0.0;
  for (std::size_t s = 0; s < f.size(); ++s) gf += g[s] * f[s];
  return gf / ff;
}

}  // namespace dislab
