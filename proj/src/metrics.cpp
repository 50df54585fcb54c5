#include "dislab/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

#include "dislab/network_simplex.hpp"

namespace dislab {

double AtomicMeasure::mass() const { return std::accumulate(weights.begin(), weights.end(), 0.0); }

void AtomicMeasure::add(TorusPoint x, double w) {
  if (components != 1) throw std::invalid_argument("AtomicMeasure::add: measure has several components");
  points.push_back(x);
  weights.push_back(w);
}

void AtomicMeasure::add(const std::vector<TorusPoint>& xs, double w) {
  if (static_cast<int>(xs.size()) != components) throw std::invalid_argument("AtomicMeasure::add: component count");
  points.insert(points.end(), xs.begin(), xs.end());
  weights.push_back(w);
}

double product_distance(const AtomicMeasure& a, std::size_t i, const AtomicMeasure& b, std::size_t j) {
  double d = 0.0;
  int c = a.components;
  for (int k = 0; k < c; ++k) d += torus_distance(a.points[i * c + k], b.points[j * c + k]);
  return d;
}

std::pair<AtomicMeasure, AtomicMeasure> empirical_measure(const SignedConfiguration& c) {
  validate(c);
  AtomicMeasure plus, minus;
  double w = 1.0 / static_cast<double>(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) (c.signs[i] > 0 ? plus : minus).add(c.positions[i], w);
  return {plus, minus};
}

std::pair<AtomicMeasure, AtomicMeasure> empirical_measure(const LatticeConfiguration& c) {
  validate(c);
  AtomicMeasure plus, minus;
  double w = 1.0 / static_cast<double>(c.size());
  int n = c.lattice.size();
  for (std::size_t i = 0; i < c.size(); ++i) {
    (c.signs[i] > 0 ? plus : minus).add(site_position(c.sites[i], n), w);
  }
  return {plus, minus};
}

std::pair<AtomicMeasure, AtomicMeasure> atomize(const LatticeDensityPair& rho) {
  AtomicMeasure plus, minus;
  int n = rho.lattice.size();
  double e2 = rho.lattice.spacing() * rho.lattice.spacing();
  for (std::size_t i = 0; i < rho.lattice.sites(); ++i) {
    TorusPoint x = site_position(site_from_index(i, n), n);
    if (rho.plus[i] != 0.0) plus.add(x, e2 * rho.plus[i]);
    if (rho.minus[i] != 0.0) minus.add(x, e2 * rho.minus[i]);
  }
  return {plus, minus};
}

std::pair<AtomicMeasure, AtomicMeasure> atomize(const GridDensityPair& rho, int coarse) {
  int m = rho.grid;
  if (coarse < 1 || m % coarse != 0) throw std::invalid_argument("atomize: coarse grid must divide M");
  int r = m / coarse;
  double cell = 1.0 / (static_cast<double>(m) * m);
  AtomicMeasure plus, minus;
  for (int a = 0; a < coarse; ++a) {
    for (int b = 0; b < coarse; ++b) {
      double wp = 0.0, wm = 0.0;
      for (int i = a * r; i < (a + 1) * r; ++i) {
        for (int j = b * r; j < (b + 1) * r; ++j) {
          std::size_t idx = static_cast<std::size_t>(i) * m + j;
          wp += rho.plus[idx];
          wm += rho.minus[idx];
        }
      }
      TorusPoint c = wrap((a * r + 0.5 * (r - 1)) / m, (b * r + 0.5 * (r - 1)) / m);
      plus.add(c, wp * cell);
      minus.add(c, wm * cell);
    }
  }
  return {plus, minus};
}

L2Distance l2_lattice_distance(const LatticeDensityPair& f, const LatticeDensityPair& g) {
  if (!(f.lattice == g.lattice)) throw std::invalid_argument("l2_lattice_distance: lattice spacings differ");
  double e2 = f.lattice.spacing() * f.lattice.spacing();
  double sp = 0.0, sm = 0.0;
  for (std::size_t i = 0; i < f.plus.size(); ++i) {
    double a = f.plus[i] - g.plus[i], b = f.minus[i] - g.minus[i];
    sp += a * a;
    sm += b * b;
  }
  L2Distance d;
  d.plus = std::sqrt(e2 * sp);
  d.minus = std::sqrt(e2 * sm);
  d.total = std::sqrt(e2 * (sp + sm));
  return d;
}

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Merge both measures onto one support; eta = mu - nu.
void union_support(const AtomicMeasure& mu, const AtomicMeasure& nu, AtomicMeasure& support,
                   std::vector<double>& eta) {
  if (mu.components != nu.components) throw std::invalid_argument("metric: component counts differ");
  int c = mu.components;
  support = AtomicMeasure{};
  support.components = c;
  eta.clear();
  std::map<std::vector<double>, std::size_t> index;
  auto put = [&](const AtomicMeasure& m, double sign) {
    for (std::size_t a = 0; a < m.atoms(); ++a) {
      std::vector<double> key;
      std::vector<TorusPoint> pts;
      for (int k = 0; k < c; ++k) {
        const TorusPoint& p = m.points[a * c + k];
        key.push_back(p.x1());
        key.push_back(p.x2());
        pts.push_back(p);
      }
      auto it = index.find(key);
      if (it == index.end()) {
        it = index.emplace(key, support.atoms()).first;
        support.add(pts, 0.0);
        eta.push_back(0.0);
      }
      eta[it->second] += sign * m.weights[a];
    }
  };
  put(mu, 1.0);
  put(nu, -1.0);
}

struct BlEval {
  double value, ground_flow, pair_cost;
  std::vector<double> phi;
};

class BlNetwork {
 public:
  BlNetwork(const AtomicMeasure& sup, const std::vector<double>& eta,
            const std::vector<std::pair<int, int>>& pairs)
      : n_(static_cast<int>(sup.atoms())), flow_(n_ + 1) {
    double total = 0.0;
    for (int p = 0; p < n_; ++p) {
      flow_.set_supply(p, eta[p]);
      total += eta[p];
    }
    flow_.set_supply(n_, -total);
    for (int p = 0; p < n_; ++p) {
      ground_.push_back(flow_.add_arc(p, n_, 0.0));
      ground_.push_back(flow_.add_arc(n_, p, 0.0));
    }
    for (auto [p, q] : pairs) {
      double d = product_distance(sup, p, sup, q);
      pair_arcs_.push_back(flow_.add_arc(p, q, d));
      dist_.push_back(d);
    }
  }

  BlEval eval(double s) {
    for (int a : ground_) flow_.set_cost(a, s);
    for (std::size_t i = 0; i < pair_arcs_.size(); ++i) flow_.set_cost(pair_arcs_[i], (1.0 - s) * dist_[i]);
    if (flow_.solve(1e-9) != MinCostFlow::Status::optimal) {
      throw std::runtime_error("bl_dual_norm: flow problem infeasible");
    }
    BlEval e{0.0, 0.0, 0.0, {}};
    for (int a : ground_) e.ground_flow += flow_.flow(a);
    for (std::size_t i = 0; i < pair_arcs_.size(); ++i) e.pair_cost += dist_[i] * flow_.flow(pair_arcs_[i]);
    e.value = s * e.ground_flow + (1.0 - s) * e.pair_cost;
    // phi_p = pi_ground - pi_p, normalized so phi(ground) = 0.
    e.phi.resize(n_);
    for (int p = 0; p < n_; ++p) e.phi[p] = flow_.potential(n_) - flow_.potential(p);
    return e;
  }

 private:
  int n_;
  MinCostFlow flow_;
  std::vector<int> ground_, pair_arcs_;
  std::vector<double> dist_;
};

struct BlSolution {
  double value;
  std::vector<double> phi;
};

// Kelley's cutting planes on the concave piecewise-linear g(s).
BlSolution maximize_over_split(BlNetwork& net, double tol) {
  BlEval e0 = net.eval(0.0);
  BlEval e1 = net.eval(1.0);
  auto line = [](const BlEval& e) { return std::pair<double, double>{e.pair_cost, e.ground_flow - e.pair_cost}; };
  auto [a_l, m_l] = line(e0);  // value(s) = a + m s
  auto [a_r, m_r] = line(e1);
  BlSolution best{e0.value, e0.phi};
  if (e1.value > best.value) best = {e1.value, e1.phi};
  if (m_l <= 0.0) return {e0.value, e0.phi};
  if (m_r >= 0.0) return {e1.value, e1.phi};
  for (int it = 0; it < 200; ++it) {
    double s = (a_r - a_l) / (m_l - m_r);
    s = std::clamp(s, 0.0, 1.0);
    double upper = std::min(a_l + m_l * s, a_r + m_r * s);
    if (upper - best.value <= tol * std::max(1.0, std::abs(upper))) break;
    BlEval e = net.eval(s);
    if (e.value > best.value) best = {e.value, e.phi};
    auto [a, m] = line(e);
    if (m > 0.0) {
      a_l = a; m_l = m;
    } else if (m < 0.0) {
      a_r = a; m_r = m;
    } else {
      break;
    }
  }
  return best;
}

std::vector<std::pair<int, int>> all_pairs(int n) {
  std::vector<std::pair<int, int>> out;
  out.reserve(static_cast<std::size_t>(n) * (n - 1));
  for (int p = 0; p < n; ++p) {
    for (int q = 0; q < n; ++q) {
      if (p != q) out.emplace_back(p, q);
    }
  }
  return out;
}

std::vector<std::pair<int, int>> neighbour_pairs(const AtomicMeasure& sup, int k) {
  int n = static_cast<int>(sup.atoms());
  std::vector<std::pair<int, int>> und;
  std::vector<std::pair<double, int>> cand(n);
  for (int p = 0; p < n; ++p) {
    for (int q = 0; q < n; ++q) cand[q] = {q == p ? 1e300 : product_distance(sup, p, sup, q), q};
    int kk = std::min(k, n - 1);
    std::nth_element(cand.begin(), cand.begin() + kk, cand.end());
    for (int i = 0; i < kk; ++i) {
      int q = cand[i].second;
      und.emplace_back(std::min(p, q), std::max(p, q));
    }
  }
  std::sort(und.begin(), und.end());
  und.erase(std::unique(und.begin(), und.end()), und.end());
  std::vector<std::pair<int, int>> out;
  out.reserve(2 * und.size());
  for (auto [p, q] : und) {
    out.emplace_back(p, q);
    out.emplace_back(q, p);
  }
  return out;
}

// sup|phi| + Lip(phi) over all pairs of the support.
double bl_norm_of(const AtomicMeasure& sup, const std::vector<double>& phi) {
  int n = static_cast<int>(sup.atoms());
  double sup_abs = 0.0, lip = 0.0;
  for (int p = 0; p < n; ++p) {
    sup_abs = std::max(sup_abs, std::abs(phi[p]));
    for (int q = p + 1; q < n; ++q) {
      double diff = std::abs(phi[p] - phi[q]);
      if (diff == 0.0) continue;
      double d = product_distance(sup, p, sup, q);
      lip = std::max(lip, diff / d);
    }
  }
  return sup_abs + lip;
}

}  // namespace

MetricReport bl_dual_norm_signed(const AtomicMeasure& support, const std::vector<double>& eta, const BlOptions& opt) {
  auto t0 = std::chrono::steady_clock::now();
  if (support.atoms() == 0) throw std::invalid_argument("bl_dual_norm: empty supports");
  if (eta.size() != support.atoms()) throw std::invalid_argument("bl_dual_norm: weight count mismatch");
  MetricReport r;
  r.metric = "bl_dual";
  int n = static_cast<int>(support.atoms());
  bool all_zero = std::all_of(eta.begin(), eta.end(), [](double v) { return v == 0.0; });
  if (all_zero) {
    r.method = "exact-lp";
    r.wall_seconds = seconds_since(t0);
    return r;
  }
  if (n <= opt.exact_limit) {
    BlNetwork net(support, eta, all_pairs(n));
    BlSolution s = maximize_over_split(net, opt.tolerance);
    r.value = s.value;
    r.method = "exact-lp";
    r.err_factor = 1.0;
  } else {
    int k = opt.neighbours;
    for (;;) {
      BlNetwork net(support, eta, neighbour_pairs(support, k));
      BlSolution s = maximize_over_split(net, opt.tolerance);
      double norm = bl_norm_of(support, s.phi);
      r.value = s.value;
      r.method = "relaxed";
      r.err_factor = std::max(1.0, norm);
      if (r.err_factor <= opt.max_err_factor || k >= 256 || k >= n - 1) break;
      k *= 2;
    }
  }
  r.wall_seconds = seconds_since(t0);
  return r;
}

MetricReport bl_dual_norm(const AtomicMeasure& mu, const AtomicMeasure& nu, const BlOptions& opt) {
  if (mu.atoms() == 0 && nu.atoms() == 0) throw std::invalid_argument("bl_dual_norm: empty supports");
  AtomicMeasure sup;
  std::vector<double> eta;
  union_support(mu, nu, sup, eta);
  return bl_dual_norm_signed(sup, eta, opt);
}

MetricReport w1_distance(const AtomicMeasure& mu, const AtomicMeasure& nu, int n_components) {
  auto t0 = std::chrono::steady_clock::now();
  if (mu.components != n_components || nu.components != n_components) {
    throw std::invalid_argument("w1_distance: measures do not have n_components components");
  }
  if (mu.atoms() == 0 || nu.atoms() == 0) throw std::invalid_argument("w1_distance: empty support");
  double mm = mu.mass(), mn = nu.mass();
  if (std::abs(mm - mn) > 1e-12 * std::max(1.0, std::max(mm, mn))) {
    throw std::invalid_argument("w1_distance: masses differ");
  }
  int a = static_cast<int>(mu.atoms()), b = static_cast<int>(nu.atoms());
  MinCostFlow flow(a + b);
  for (int i = 0; i < a; ++i) flow.set_supply(i, mu.weights[i]);
  for (int j = 0; j < b; ++j) flow.set_supply(a + j, -nu.weights[j]);
  for (int i = 0; i < a; ++i) {
    for (int j = 0; j < b; ++j) flow.add_arc(i, a + j, product_distance(mu, i, nu, j));
  }
  // Leftover imbalance below the mass tolerance stays on artificial arcs.
  flow.solve(1e-10);
  MetricReport r;
  r.metric = "w1";
  r.value = flow.total_cost();
  r.method = "flow";
  r.wall_seconds = seconds_since(t0);
  return r;
}

double mass_discrepancy(double mass_plus, int n_plus, int n) {
  if (n < 1 || n_plus < 0 || n_plus > n) throw std::invalid_argument("mass_discrepancy: need 0 <= n+ <= n, n >= 1");
  return std::abs(mass_plus - static_cast<double>(n_plus) / n);
}

}  // namespace dislab
