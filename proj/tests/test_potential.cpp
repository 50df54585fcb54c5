#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <cstdio>
#include <filesystem>
#include <random>

#include "dislab/potential.hpp"

using namespace dislab;

namespace {

// Direct Fourier sum of the mollified Poisson series, built from the two
// ingredient functions rather than the coefficient table.
Vec2 direct_gradient(double delta, int K, TorusPoint x) {
  Vec2 g;
  for (int k1 = -K; k1 <= K; ++k1) {
    for (int k2 = -K; k2 <= K; ++k2) {
      if (k1 == 0 && k2 == 0) continue;
      double c = poisson_green_coefficient(k1, k2) *
                 mollifier_transform(Mollifier::bump, delta * std::hypot(double(k1), double(k2)));
      double s = std::sin(2 * M_PI * (k1 * x.x1() + k2 * x.x2()));
      g.x1 += c * (-2 * M_PI * k1) * s;
      g.x2 += c * (-2 * M_PI * k2) * s;
    }
  }
  return g;
}

}  // namespace

TEST_SUITE("potential") {
  TEST_CASE("green_coefficient examples") {
    CHECK(green_coefficient(0, 0) == 0.0);
    CHECK(green_coefficient(1, 0) == doctest::Approx(-39.4784176).epsilon(1e-9));
    CHECK(green_coefficient(1, 1) == doctest::Approx(-2 * M_PI * M_PI).epsilon(1e-14));
    CHECK(poisson_green_coefficient(1, 0) == doctest::Approx(1.0 / (4 * M_PI * M_PI)).epsilon(1e-14));
    CHECK(green_coefficient(2, -1, GreenNormalization::poisson) == poisson_green_coefficient(2, -1));
  }

  TEST_CASE("mollifier transforms have unit mass") {
    CHECK(mollifier_transform(Mollifier::bump, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(mollifier_transform(Mollifier::poly6, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    // poly6: c (1 - r^2)^6 with c = 7/pi has E|x|^2 = 1/8, so near zero
    // phi^(xi) = 1 - 2 pi^2 xi^2 E[x1^2] = 1 - pi^2 xi^2 / 8.
    double xi = 1e-3;
    CHECK(mollifier_transform(Mollifier::poly6, xi) == doctest::Approx(1 - M_PI * M_PI * xi * xi / 8).epsilon(1e-10));
  }

  TEST_CASE("build_potential rejects bad parameters") {
    CHECK_THROWS_AS(build_potential({0.0}), std::invalid_argument);
    CHECK_THROWS_AS(build_potential({1.5}), std::invalid_argument);
    PotentialSpec s;
    s.delta = 0.25;
    s.cutoff = 15;  // below ceil(4/delta) = 16
    CHECK_THROWS_AS(build_potential(s), std::invalid_argument);
    s.cutoff = 16;
    s.grid = 48;  // not a power of two
    CHECK_THROWS_AS(build_potential(s), std::invalid_argument);
    s.grid = 32;  // below 4K
    CHECK_THROWS_AS(build_potential(s), std::invalid_argument);
    s.grid = 64;
    CHECK_NOTHROW(build_potential(s));
    CHECK(default_cutoff(0.25) == 32);
    CHECK(default_grid(32) == 128);
  }

  TEST_CASE("grid samples: zero mean, even value, odd gradient") {
    for (double delta : {0.1, 0.3}) {
      auto p = build_potential({delta});
      int M = p.grid();
      const auto& v = p.values();
      double mean = 0.0;
      for (double x : v) mean += x;
      mean /= v.size();
      CHECK(std::abs(mean) < 1e-10);
      CHECK(p.coeff(0, 0) == 0.0);
      double worst_even = 0.0, worst_odd = 0.0;
      for (int i = 0; i < M; ++i) {
        for (int j = 0; j < M; ++j) {
          std::size_t a = std::size_t(i) * M + j, b = std::size_t((M - i) % M) * M + (M - j) % M;
          worst_even = std::max(worst_even, std::abs(v[a] - v[b]));
          worst_odd = std::max(worst_odd, std::abs(p.grad1()[a] + p.grad1()[b]) + std::abs(p.grad2()[a] + p.grad2()[b]));
        }
      }
      CHECK(worst_even < 1e-12);
      CHECK(worst_odd < 1e-10);
      for (int k1 = -5; k1 <= 5; ++k1)
        for (int k2 = -5; k2 <= 5; ++k2) REQUIRE(p.coeff(k1, k2) == p.coeff(-k1, -k2));
    }
  }

  TEST_CASE("self-convergence against doubled resolution") {
    PotentialSpec a{0.1}, b{0.1};
    a.cutoff = 128;
    a.grid = 512;
    b.cutoff = 256;
    b.grid = 1024;
    auto pa = build_potential(a), pb = build_potential(b);
    double worst = 0.0;
    for (int i = 0; i < 512; ++i)
      for (int j = 0; j < 512; ++j)
        worst = std::max(worst, std::abs(pa.values()[i * 512 + j] - pb.values()[(2 * i) * 1024 + 2 * j]));
    CHECK(worst <= 1e-6);
  }

  TEST_CASE("eval_potential examples") {
    auto p = build_potential({0.1});
    auto g0 = std::get<Vec2>(eval_potential(p, wrap(0, 0), 1));
    CHECK(std::abs(g0.x1) < 1e-12);
    CHECK(std::abs(g0.x2) < 1e-12);
    std::mt19937_64 g(2);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    for (int i = 0; i < 20; ++i) {
      double x1 = u(g), x2 = u(g);
      double a = std::get<double>(eval_potential(p, wrap(x1, x2), 0));
      double b = std::get<double>(eval_potential(p, wrap(-x1, -x2), 0));
      REQUIRE(a == doctest::Approx(b).epsilon(1e-13));
    }
    auto x = wrap(0.25, 0.0);
    Vec2 got = std::get<Vec2>(eval_potential(p, x, 1));
    Vec2 ref = direct_gradient(0.1, p.cutoff(), x);
    CHECK(std::abs(got.x1 - ref.x1) < 1e-8);
    CHECK(std::abs(got.x2 - ref.x2) < 1e-8);
    CHECK_THROWS_AS(eval_potential(p, x, 3), std::invalid_argument);
  }

  TEST_CASE("grid interpolation error is second order") {
    auto p = build_potential({0.2});
    double h = 1.0 / p.grid();
    auto rep = verify_assumption(p);
    std::mt19937_64 g(4);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
      Vec2 d{u(g), u(g)};
      Vec2 e = p.gradient_at(wrap(d)), a = p.gradient_interpolated(d);
      worst = std::max(worst, (e - a).norm());
    }
    CHECK(worst <= 0.25 * h * h * rep.sup_norms[3] * 2);
  }

  TEST_CASE("spectral consistency of the Laplacian") {
    auto p = build_potential({0.25});
    int M = p.grid();
    for (auto [k1, k2] : {std::pair{1, 0}, std::pair{2, 3}, std::pair{-4, 1}}) {
      double acc = 0.0;
      for (int i = 0; i < M; ++i)
        for (int j = 0; j < M; ++j)
          acc += -p.laplacian()[std::size_t(i) * M + j] * std::cos(2 * M_PI * (k1 * i + k2 * j) / double(M));
      acc /= double(M) * M;
      double expect = 4 * M_PI * M_PI * (k1 * k1 + k2 * k2) * p.coeff(k1, k2);
      CHECK(acc == doctest::Approx(expect).epsilon(1e-10));
    }
  }

  TEST_CASE("assumption report across delta") {
    std::vector<AssumptionReport> reps;
    for (double d : {0.05, 0.1, 0.2}) reps.push_back(verify_assumption(build_potential({d})));
    for (const auto& r : reps) {
      for (int k = 0; k < 6; ++k) {
        CHECK(std::isfinite(r.constants[k]));
        CHECK(r.constants[k] > 0.0);
      }
      CHECK(r.c_v() >= r.c_v_upto(2));
    }
    for (int k = 0; k < 6; ++k) {
      double lo = 1e300, hi = 0.0;
      for (const auto& r : reps) {
        lo = std::min(lo, r.constants[k]);
        hi = std::max(hi, r.constants[k]);
      }
      CHECK(hi / lo < 3.0);
    }
    CHECK(reps[0].sup_norms[1] > reps[1].sup_norms[1]);
    CHECK(reps[1].sup_norms[1] > reps[2].sup_norms[1]);
  }

  TEST_CASE("cache round trip") {
    auto p = build_potential({0.3});
    auto dir = std::filesystem::temp_directory_path() / "dislab_potential_test";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    auto path = (dir / "v.bin").string();
    save_potential(p, path);
    auto q = load_potential(path);
    CHECK(q.delta() == p.delta());
    CHECK(q.cutoff() == p.cutoff());
    CHECK(q.grid() == p.grid());
    CHECK(q.coeffs() == p.coeffs());
    CHECK(q.values() == p.values());
    CHECK(q.grad2() == p.grad2());
    auto c1 = cached_potential({0.3}, dir.string());
    auto c2 = cached_potential({0.3}, dir.string());
    CHECK(c1.values() == c2.values());
    {
      std::FILE* f = std::fopen(path.c_str(), "wb");
      std::fputs("junk", f);
      std::fclose(f);
    }
    CHECK_THROWS(load_potential(path));
    std::filesystem::remove_all(dir);
  }
}
