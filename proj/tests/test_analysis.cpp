#include <doctest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <stdexcept>
#include <random>

#include "dislab/analysis.hpp"
#include "dislab/fokker_planck.hpp"
#include "dislab/meanfield_continuum.hpp"
#include "dislab/rw_simulator.hpp"

using namespace dislab;

namespace {

std::vector<TorusPoint> at_state(const LatticeStateSpace& sp, std::size_t s) {
  std::vector<TorusPoint> x;
  for (auto l : sp.decode(s)) x.push_back(site_position(l, sp.lattice.size()));
  return x;
}

std::vector<double> random_field(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  std::normal_distribution<double> z;
  std::vector<double> v(n);
  for (auto& x : v) x = z(g);
  return v;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

TEST_SUITE("analysis") {
  TEST_CASE("state space encoding") {
    LatticeStateSpace sp{Lattice(5), 2};
    CHECK(sp.states() == 625u);
    for (std::size_t s : {0u, 7u, 311u, 624u}) CHECK(sp.encode(sp.decode(s)) == s);
    auto x = sp.decode(sp.encode({{1, 2}, {4, 0}}));
    CHECK(x[1] == LatticeSite{4, 0});
    // particle 1 stepping +e2 from (4, 0)
    CHECK(sp.decode(sp.neighbour(sp.encode({{1, 2}, {4, 0}}), 1, 2))[1] == LatticeSite{4, 1});
    CHECK(sp.decode(sp.neighbour(sp.encode({{1, 2}, {4, 0}}), 0, 1))[0] == LatticeSite{0, 2});
  }

  TEST_CASE("constants are annihilated without force") {
    LatticeStateSpace sp{Lattice(16), 1};
    std::vector<double> one(sp.states(), 1.0);
    auto out = apply_discrete_generator(one, sp, test_force("zero"), 1.0);
    for (double v : out) REQUIRE(v == 0.0);
  }

  TEST_CASE("the adjoint generator conserves mass") {
    LatticeStateSpace sp{Lattice(12), 1};
    auto f = random_field(sp.states(), 3);
    auto out = apply_discrete_generator(f, sp, test_force("smooth", 1.5), 2.0);
    double s = 0, a = 0;
    for (double v : out) {
      s += v;
      a += std::abs(v);
    }
    CHECK(std::abs(s) < 1e-12 * a);
  }

  TEST_CASE("single-site bump matches the five-point formula") {
    int N = 16;
    double beta = 2.0, e = 1.0 / N;
    LatticeStateSpace sp{Lattice(N), 1};
    std::vector<double> f(sp.states(), 0.0);
    LatticeSite l0{5, 9};
    f[site_index(l0, N)] = 1.0;
    auto out = apply_discrete_generator(f, sp, test_force("zero"), beta);
    double r = 1.0 / (beta * e * e);
    for (std::size_t s = 0; s < out.size(); ++s) {
      LatticeSite l = site_from_index(s, N);
      double expect = 0.0;
      for (const auto& h : kDirections) expect += r * f[site_index(step(l, h, N), N)];
      expect -= 4 * r * f[s];
      REQUIRE(out[s] == doctest::Approx(expect).epsilon(1e-14).scale(1.0));
    }
    CHECK(out[site_index(l0, N)] == doctest::Approx(-4 * r));
  }

  TEST_CASE("continuum generator examples") {
    auto f = test_function("cos_mode");
    for (double x1 : {0.0, 0.1, -0.37}) {
      std::vector<TorusPoint> x{wrap(x1, 0.2)};
      double beta = 3.0;
      double expect = -(4 * M_PI * M_PI) * 0.5 * std::cos(2 * M_PI * x1) / beta;
      CHECK(apply_continuum_generator(f, test_force("zero"), beta, x) == doctest::Approx(expect).epsilon(1e-13));
    }
    // product test function under the divergence-free shear, written out by hand
    auto g = test_function("product");
    double A = 0.7, beta = 1.5;
    for (auto [x1, x2] : {std::pair{0.1, 0.3}, std::pair{-0.45, 0.05}, std::pair{0.2, -0.2}}) {
      double a = 2 * M_PI * x1, b = 4 * M_PI * x2;
      double gx = -M_PI * std::sin(a) * std::cos(b), gy = -2 * M_PI * std::cos(a) * std::sin(b);
      double F1 = A * std::sin(2 * M_PI * x2), F2 = 0.5 * A * std::cos(2 * M_PI * x1);
      double lap = -10 * M_PI * M_PI * std::cos(a) * std::cos(b);
      double expect = -(gx * F1 + gy * F2) + lap / beta;
      double got = apply_continuum_generator(g, test_force("shear", A), beta, {wrap(x1, x2)});
      CHECK(got == doctest::Approx(expect).epsilon(1e-12).scale(1.0));
    }
    // frozen dynamics drop the Laplacian
    double inf = std::numeric_limits<double>::infinity();
    CHECK(apply_continuum_generator(f, test_force("zero"), inf, {wrap(0.1, 0)}) == 0.0);
  }

  TEST_CASE("smooth force divergence matches finite differences") {
    auto F = test_force("smooth", 0.8);
    const double h = 1e-5;
    for (auto [x1, x2] : {std::pair{0.1, 0.3}, std::pair{-0.4, 0.15}}) {
      double d1 = (F({wrap(x1 + h, x2)}).force[0].x1 - F({wrap(x1 - h, x2)}).force[0].x1) / (2 * h);
      double d2 = (F({wrap(x1, x2 + h)}).force[0].x2 - F({wrap(x1, x2 - h)}).force[0].x2) / (2 * h);
      CHECK(F({wrap(x1, x2)}).divergence == doctest::Approx(d1 + d2).epsilon(1e-7));
    }
    auto p = build_potential({0.25});
    auto pin = test_force("pinned", 1.0, &p);
    CHECK(pin({wrap(0.1, 0.2)}).divergence == doctest::Approx(-p.laplacian_at(wrap(0.1, 0.2))));
    CHECK_THROWS(test_force("pinned"));
    CHECK_THROWS(test_force("vortex"));
    CHECK_THROWS(test_function("gaussian"));
  }

  TEST_CASE("forward and adjoint generators are dual") {
    auto p = build_potential({0.3});
    for (int n : {1, 2}) {
      LatticeStateSpace sp{Lattice(n == 1 ? 16 : 6), n};
      SmoothForce F = n == 1 ? test_force("smooth", 1.2) : pairwise_force(p, {1, -1});
      auto f = random_field(sp.states(), 10 + n), g = random_field(sp.states(), 20 + n);
      auto Af = apply_discrete_generator(f, sp, F, 2.0);
      auto Bg = apply_forward_generator(g, sp, F, 2.0);
      double lhs = dot(Af, g), rhs = dot(f, Bg);
      CHECK(std::abs(lhs - rhs) <= 1e-12 * (std::abs(lhs) + std::sqrt(dot(Af, Af) * dot(g, g))));
    }
  }

  TEST_CASE("consistency defects scale like eps^2") {
    auto d = consistency_order("shifted", "smooth", {1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128}, 1.0, 0.25, 0.5);
    REQUIRE(d.defects.size() == 4u);
    for (std::size_t k = 1; k < d.defects.size(); ++k) {
      double r = d.defects[k - 1] / d.defects[k];
      CHECK(r > 4 * 0.85);
      CHECK(r < 4 * 1.15);
    }
    CHECK(d.order == doctest::Approx(2.0).epsilon(0.05));
    CHECK_THROWS(consistency_order("shifted", "smooth", {1.0 / 16, 1.0 / 32}, 1.0, 0.25));
  }

  TEST_CASE("consistency defect is linear in 1/beta for a weak force") {
    std::vector<double> eps{1.0 / 16, 1.0 / 32, 1.0 / 64};
    auto f = test_function("product");
    auto F = test_force("shear", 0.01);
    double ref = consistency_order(f, F, eps, 1.0).defects[1];
    for (double beta : {2.0, 4.0}) {
      double got = consistency_order(f, F, eps, beta).defects[1] * beta;
      CHECK(got / ref == doctest::Approx(1.0).epsilon(0.2));
    }
  }

  TEST_CASE("constant test function has no defect without force") {
    auto d = consistency_order(test_function("constant"), test_force("zero"), {0.25, 0.125, 1.0 / 16}, 1.0);
    for (double v : d.defects) CHECK(v <= 1e-13);
  }

  TEST_CASE("force-free generator is non-positive") {
    LatticeStateSpace sp{Lattice(12), 1};
    for (std::uint64_t s = 0; s < 10; ++s)
      CHECK(stability_rayleigh(random_field(sp.states(), s), sp, test_force("zero"), 1.0) <= 1e-12);
    std::vector<double> one(sp.states(), 2.0);
    CHECK(stability_rayleigh(one, sp, test_force("zero"), 1.0) == 0.0);
    CHECK_THROWS(stability_rayleigh(std::vector<double>(sp.states(), 0.0), sp, test_force("zero"), 1.0));
  }

  TEST_CASE("Rayleigh quotient is bounded by the force size") {
    // Largest quotient = top eigenvalue of the symmetric part, by shifted power
    // iteration. C frozen from a calibration run over these cases (max ratio 0.061).
    const double C = 0.1;
    LatticeStateSpace sp{Lattice(16), 1};
    for (double a : {0.5, 1.0, 2.0, 4.0}) {
      for (double beta : {1.0, 3.0}) {
        auto F = test_force("smooth", a);
        DiscreteGenerator G(sp, F, beta);
        double shift = 2 * G.max_exit_rate();
        auto f = random_field(sp.states(), 5);
        for (auto& v : f) v = 1 + 0.1 * v;
        std::vector<double> x, y;
        for (int it = 0; it < 20000; ++it) {
          G.apply_adjoint(f, x);
          G.apply_forward(f, y);
          for (std::size_t i = 0; i < f.size(); ++i) f[i] = 0.5 * (x[i] + y[i]) + shift * f[i];
          double nrm = std::sqrt(dot(f, f));
          for (auto& v : f) v /= nrm;
        }
        double top = stability_rayleigh(f, sp, F, beta);
        double sup_f = a * std::sqrt(1.0 + 0.7 * 0.7), sup_df = a * 2 * M_PI;
        double bound = C * (sup_df + beta * sup_f * sup_f);
        CAPTURE(a);
        CAPTURE(beta);
        CHECK(top > 0.0);
        CHECK(top <= bound);
        for (std::uint64_t s = 0; s < 3; ++s) CHECK(stability_rayleigh(random_field(sp.states(), 100 + s), sp, F, beta) <= top);
      }
    }
  }

  TEST_CASE("line fit") {
    auto f = fit_line({1, 2, 3, 4}, {3, 5, 7, 9});
    CHECK(f.slope == doctest::Approx(2.0));
    CHECK(f.intercept == doctest::Approx(1.0));
    CHECK(f.slope_ci == doctest::Approx(0.0).scale(1e-6));
    auto g = fit_line({0, 1, 2, 3}, {0, 1.1, 1.9, 3.0});
    CHECK(g.slope_ci > 0.0);
    CHECK(fit_line({0, 1}, {1, 2}).slope_ci == 0.0);
    CHECK_THROWS(fit_line({1, 1, 1}, {0, 1, 2}));
    CHECK_THROWS(fit_line({1}, {0}));
  }
}

TEST_SUITE("analysis") {
  TEST_CASE("discrete Fokker-Planck conserves mass") {
    auto p = build_potential({0.25});
    LatticeStateSpace sp{Lattice(8), 2};
    InitialCondition ic;
    auto f0 = product_initial_law(ic, {1, -1}, sp);
    auto tr = solve_discrete_fp(f0, sp, {1, -1}, p, 2.0, 0.05);
    double m0 = 0, m1 = 0;
    for (double v : f0) m0 += v;
    for (double v : tr.states.back()) {
      m1 += v;
      REQUIRE(v > -1e-12);
    }
    CHECK(std::abs(m1 - m0) <= 1e-10 * m0);
    CHECK(tr.times.back() == 0.05);
  }

  TEST_CASE("one free walker: master equation against the closed form") {
    // n = 1 feels no force; per axis the law is a product of discrete heat kernels
    int N = 4;
    double beta = 1.0, T = 0.05, r = N * N / beta;
    auto p = build_potential({0.25});
    LatticeStateSpace sp{Lattice(N), 1};
    std::vector<double> f0(sp.states(), 0.0);
    f0[0] = N * N;
    auto law = solve_discrete_fp(f0, sp, {1}, p, beta, T).states.back();
    auto axis = [&](int x) {
      double s = 0;
      for (int k = 0; k < N; ++k)
        s += std::cos(2 * M_PI * k * x / N) * std::exp(-T * r * (2 - 2 * std::cos(2 * M_PI * k / N)));
      return s / N;
    };
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) CHECK(law[site_index({i, j}, N)] / (N * N) == doctest::Approx(axis(i) * axis(j)).epsilon(1e-6));
  }

  TEST_CASE("continuum Fokker-Planck of one particle matches the heat flow") {
    auto p = build_potential({0.25});
    int m = 32;
    InitialCondition ic;
    auto f0 = product_initial_law(ic, {1}, m);
    auto tr = solve_continuum_fp(f0, m, {1}, p, 2.0, 0.1);
    // independent route: mean-field solver with the force switched off
    GridDensityPair rho(m);
    rho.plus = f0;
    std::fill(rho.minus.begin(), rho.minus.end(), 0.0);
    MfOptions o;
    o.force_enabled = false;
    auto mf = solve_mf(rho, p, 2.0, 0.1, o);
    double d = 0;
    for (std::size_t c = 0; c < f0.size(); ++c) d = std::max(d, std::abs(tr.states.back()[c] - mf.states.back().plus[c]));
    CHECK(d < 1e-10);
  }

  TEST_CASE("law restriction and distance") {
    int m = 16;
    LatticeStateSpace sp{Lattice(8), 1};
    InitialCondition ic;
    auto g = product_initial_law(ic, {-1}, m);
    auto r = restrict_law(g, m, sp);
    auto l = product_initial_law(ic, {-1}, sp);
    CHECK(l2_law_distance(r, l, sp) < 1e-12);
    LatticeStateSpace bad{Lattice(6), 1};
    CHECK_THROWS(restrict_law(g, m, bad));
    std::vector<double> z(sp.states(), 0.0), o(sp.states(), 1.0);
    CHECK(l2_law_distance(z, o, sp) == doctest::Approx(1.0));
  }

  TEST_CASE("two-particle master equation matches the simulated walk") {
    int N = 4;
    double beta = 1.0, T = 0.05;
    auto p = build_potential({0.25});
    LatticeStateSpace sp{Lattice(N), 2};
    LatticeConfiguration c0;
    c0.lattice = sp.lattice;
    c0.sites = {{0, 0}, {1, 0}};
    c0.signs = {1, -1};
    std::vector<double> f0(sp.states(), 0.0);
    f0[sp.encode(c0.sites)] = std::pow(double(N), 4);
    auto law = solve_discrete_fp(f0, sp, c0.signs, p, beta, T).states.back();
    LatticeKernel k(p, sp.lattice);
    const int R = 4000;
    std::vector<double> count(sp.states(), 0.0);
    for (int r = 0; r < R; ++r) {
      auto tr = simulate_rw(c0, k, beta, T, 500 + r, Scheduler::gillespie, {T});
      count[sp.encode(tr.snapshots.back().sites)] += 1;
    }
    // merge cells with small expected counts into one bin
    double chi2 = 0, rest_e = 0, rest_o = 0;
    int bins = 0;
    double w = std::pow(1.0 / N, 4);
    for (std::size_t s = 0; s < law.size(); ++s) {
      double e = law[s] * w * R;
      if (e < 5) {
        rest_e += e;
        rest_o += count[s];
        continue;
      }
      chi2 += (count[s] - e) * (count[s] - e) / e;
      ++bins;
    }
    if (rest_e > 0) {
      chi2 += (rest_o - rest_e) * (rest_o - rest_e) / rest_e;
      ++bins;
    }
    REQUIRE(bins >= 3);
    boost::math::chi_squared dist(bins - 1);
    CHECK(boost::math::cdf(boost::math::complement(dist, chi2)) > 1e-3);
  }
}
