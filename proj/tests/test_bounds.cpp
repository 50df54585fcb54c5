#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <limits>

#include "dislab/bounds.hpp"
#include "dislab/potential.hpp"

using namespace dislab;

namespace {

constexpr BoundId kAll[] = {BoundId::T1, BoundId::T2, BoundId::T3, BoundId::T4, BoundId::C1, BoundId::C2};

BoundInputs full_inputs() {
  BoundInputs in;
  in.initial_difference = 0.01;
  in.kappa = 0.002;
  in.initial_lip_sum = 3.0;
  in.initial_sup_sum = 4.0;
  return in;
}

// Straight transcription of the right-hand sides, written independently of the library.
double calc(BoundId id, const BoundParams& q, const BoundInputs& in) {
  const double e = q.eps, n = q.n, b = q.beta, d = q.delta, t = q.t, T = q.T, C = q.C, Cp = q.C1, Cpp = q.C2;
  const double cv = q.c_v, cl = q.c_v_low;
  auto zmul = [](double x, double y) { return x == 0 || y == 0 ? 0.0 : x * y; };
  double init = in.initial_difference.value_or(0), k = in.kappa.value_or(0);
  double K = b * std::pow(d, -4) *
             (in.initial_lip_sum.value_or(0) / d + std::sqrt(b * T) * std::pow(d, -4) * in.initial_sup_sum.value_or(0) +
              2 * b);
  double R1 = zmul(init, std::exp(C * n * b * t / (d * d))) + zmul(Cpp * e * e, std::exp(Cp * n * n * b * T / (d * d)));
  double R2 = zmul(init + zmul(Cpp * e * e, std::exp(Cp * b * T / (d * d))),
                   std::exp(zmul(C * K, std::exp(32 * cv * cv * b * t / (d * d)))));
  double R3 = k + C * std::log(n) / std::sqrt(n) +
              zmul(2 * cl * (1 / std::sqrt(n) + k) * (t / d), std::exp(2 * cl * t / (d * d)));
  double R4 = k + Cpp * std::log(n) / std::sqrt(n) + zmul(Cp * (1 / std::sqrt(n) + k) * (t / d), std::exp(C * t / (d * d)));
  switch (id) {
    case BoundId::T1: return R1;
    case BoundId::T2: return R2;
    case BoundId::T3: return R3;
    case BoundId::T4: return R4;
    case BoundId::C1:
      return 2 * (R2 + R4) + zmul(C * e, std::exp(b * T / (d * d)) * std::exp(32 * cv * b * t / (d * d)));
    case BoundId::C2:
      return R1 / std::sqrt(n) + (R3 - k - C * std::log(n) / std::sqrt(n)) +
             zmul(C * e, std::exp(2 * cv * b * n * T / (d * d)));
  }
  return NAN;
}

void check_same(double a, double b) {
  if (std::isinf(b)) {
    CHECK(a == b);
  } else {
    CHECK(std::isfinite(a));
    CHECK(std::abs(a - b) <= 1e-12 * std::abs(b));
  }
}

}  // namespace

TEST_SUITE("bounds") {
  TEST_CASE("id round trip") {
    for (BoundId id : kAll) CHECK(bound_from_string(to_string(id)) == id);
    CHECK_THROWS(bound_from_string("T5"));
  }

  TEST_CASE("T1 at t = 0 with no initial difference") {
    BoundParams q;
    q.eps = 1.0 / 32;
    q.n = 2;
    q.beta = 1.5;
    q.delta = 0.5;
    q.t = 0;
    q.T = 0.1;
    q.C1 = 0.5;
    q.C2 = 3.0;
    BoundInputs in;
    in.initial_difference = 0.0;
    double expect = 3.0 * q.eps * q.eps * std::exp(0.5 * 4 * 1.5 / 0.25 * 0.1);
    CHECK(bound_rhs(BoundId::T1, q, in).rhs == doctest::Approx(expect).epsilon(1e-14));
  }

  TEST_CASE("T3: quadrupling n halves the 1/sqrt(n) term") {
    BoundParams q;
    q.eps = 1.0 / 64;
    q.delta = 0.3;
    q.t = 0.25;
    q.T = 0.25;
    q.c_v_low = 0.4;
    BoundInputs in;
    in.kappa = 0.0;
    auto term = [&](int n) {
      q.n = n;
      q.C = 0.0;  // drop the log term
      double with = bound_rhs(BoundId::T3, q, in).rhs;
      return with;
    };
    for (int n : {16, 64, 256}) CHECK(term(4 * n) == doctest::Approx(term(n) / 2).epsilon(1e-14));
  }

  TEST_CASE("dual implementation at the reference parameters") {
    BoundParams q;
    q.eps = 1.0 / 64;
    q.n = 256;
    q.beta = 1.0;
    q.delta = 0.25;
    q.t = 0.25;
    q.T = 0.25;
    auto rep = verify_assumption(build_potential({0.25}));
    q.c_v = rep.c_v();
    q.c_v_low = rep.c_v_upto(2);
    auto in = full_inputs();
    for (BoundId id : kAll) {
      CAPTURE(to_string(id));
      check_same(bound_rhs(id, q, in).rhs, calc(id, q, in));
    }
    // T3 and T4 stay finite here; the exponential-in-n bounds do not
    CHECK(std::isfinite(bound_rhs(BoundId::T3, q, in).rhs));
    CHECK(std::isinf(bound_rhs(BoundId::T1, q, in).rhs));
  }

  TEST_CASE("dual implementation where every bound is finite") {
    BoundParams q;
    q.eps = 1.0 / 16;
    q.n = 2;
    q.beta = 0.2;
    q.delta = 0.8;
    q.t = 0.05;
    q.T = 0.1;
    q.C = 0.7;
    q.C1 = 1.3;
    q.C2 = 0.4;
    q.c_v = 0.9;
    q.c_v_low = 0.3;
    auto in = full_inputs();
    for (BoundId id : kAll) {
      CAPTURE(to_string(id));
      double r = bound_rhs(id, q, in).rhs;
      CHECK(std::isfinite(r));
      check_same(r, calc(id, q, in));
    }
  }

  TEST_CASE("monotone in t, 1/delta and beta") {
    auto in = full_inputs();
    BoundParams base;
    base.eps = 1.0 / 16;
    base.n = 4;
    base.T = 0.2;
    base.c_v = 0.5;
    base.c_v_low = 0.2;
    for (BoundId id : kAll) {
      CAPTURE(to_string(id));
      double prev = -1;
      for (double t : {0.0, 0.05, 0.1, 0.2}) {
        BoundParams q = base;
        q.t = t;
        double r = bound_rhs(id, q, in).rhs;
        CHECK(r >= prev);
        prev = r;
      }
      prev = -1;
      for (double d : {1.0, 0.8, 0.6, 0.5}) {
        BoundParams q = base;
        q.t = 0.1;
        q.delta = d;
        double r = bound_rhs(id, q, in).rhs;
        CHECK(r >= prev);
        prev = r;
      }
      prev = -1;
      for (double b : {0.1, 0.3, 1.0, 2.0}) {
        BoundParams q = base;
        q.t = 0.1;
        q.beta = b;
        double r = bound_rhs(id, q, in).rhs;
        CHECK(r >= prev);
        prev = r;
      }
    }
  }

  TEST_CASE("missing inputs and bad parameters") {
    BoundParams q;
    q.eps = 0.1;
    q.T = 1;
    CHECK_THROWS_AS(bound_rhs(BoundId::T1, q, {}), std::invalid_argument);
    BoundInputs k;
    k.kappa = 0.0;
    CHECK_NOTHROW(bound_rhs(BoundId::T3, q, k));
    CHECK_THROWS(bound_rhs(BoundId::T2, q, k));
    CHECK_THROWS(bound_rhs(BoundId::C2, q, k));
    q.t = 2;  // t > T
    CHECK_THROWS(bound_rhs(BoundId::T3, q, k));
  }

  TEST_CASE("gamma") {
    CHECK(gamma_constant(2.0, 0.5, 3, 0.25) == doctest::Approx(16 * 4 * 0.5 * 9 / 0.0625));
    BoundParams q;
    q.eps = 0.1;
    q.n = 3;
    q.T = 1;
    q.c_v = 2.0;
    q.beta = 0.5;
    BoundInputs k;
    k.kappa = 0.0;
    CHECK(bound_rhs(BoundId::T3, q, k).gamma == gamma_constant(2.0, 0.5, 3, 0.25));
  }
}
