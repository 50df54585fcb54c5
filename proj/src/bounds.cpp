#include "dislab/bounds.hpp"

#include <cmath>
#include <stdexcept>

namespace dislab {

std::string to_string(BoundId id) {
  switch (id) {
    case BoundId::T1: return "T1";
    case BoundId::T2: return "T2";
    case BoundId::T3: return "T3";
    case BoundId::T4: return "T4";
    case BoundId::C1: return "C1";
    case BoundId::C2: return "C2";
  }
  return "?";
}

BoundId bound_from_string(const std::string& s) {
  for (BoundId id : {BoundId::T1, BoundId::T2, BoundId::T3, BoundId::T4, BoundId::C1, BoundId::C2}) {
    if (to_string(id) == s) return id;
  }
  throw std::invalid_argument("unknown bound id '" + s + "'");
}

double gamma_constant(double c_v, double beta, int n, double delta) {
  return 16.0 * c_v * c_v * beta * n * n / (delta * delta);
}

namespace {

double mul(double a, double b) { return (a == 0.0 || b == 0.0) ? 0.0 : a * b; }

double need(const std::optional<double>& v, const char* what, BoundId id) {
  if (!v) throw std::invalid_argument("bound " + to_string(id) + " requires input '" + what + "'");
  return *v;
}

void check(const BoundParams& p) {
  if (!(p.eps > 0.0) || p.n < 1 || !(p.beta > 0.0) || !(p.delta > 0.0) || !(p.t >= 0.0) || !(p.T >= p.t)) {
    throw std::invalid_argument("bound parameters out of range (need eps, beta, delta > 0, n >= 1, 0 <= t <= T)");
  }
}

double t1(const BoundParams& p, double init) {
  double n = p.n, d2 = p.delta * p.delta;
  return mul(init, std::exp(p.C * n * p.beta / d2 * p.t)) +
         mul(p.C2 * p.eps * p.eps, std::exp(p.C1 * n * n * p.beta / d2 * p.T));
}

double lipschitz_aggregate(const BoundParams& p, double lip_sum, double sup_sum) {
  double d = p.delta;
  return p.beta / std::pow(d, 4) * (lip_sum / d + std::sqrt(p.beta * p.T) / std::pow(d, 4) * sup_sum + 2.0 * p.beta);
}

double t2(const BoundParams& p, double init, double K) {
  double d2 = p.delta * p.delta;
  double first = init + mul(p.C2 * p.eps * p.eps, std::exp(p.C1 * p.beta / d2 * p.T));
  double inner = std::exp(32.0 * p.c_v * p.c_v * p.beta / d2 * p.t);
  return mul(first, std::exp(mul(p.C * K, inner)));
}

// Shared shape of the two mean-field estimates.
double chaos_term(const BoundParams& p, double kappa, double prefactor, double rate) {
  double n = p.n;
  double decay = mul(1.0 / std::sqrt(n) + kappa, p.t / p.delta);
  return mul(prefactor * decay, std::exp(rate * p.t / (p.delta * p.delta)));
}

double t3(const BoundParams& p, double kappa) {
  double n = p.n;
  return kappa + p.C * std::log(n) / std::sqrt(n) + chaos_term(p, kappa, 2.0 * p.c_v_low, 2.0 * p.c_v_low);
}

double t4(const BoundParams& p, double kappa) {
  double n = p.n;
  return kappa + p.C2 * std::log(n) / std::sqrt(n) + chaos_term(p, kappa, p.C1, p.C);
}

}  // namespace

BoundReport bound_rhs(BoundId id, const BoundParams& params, const BoundInputs& in) {
  check(params);
  BoundReport r;
  r.id = id;
  r.params = params;
  r.gamma = gamma_constant(params.c_v, params.beta, params.n, params.delta);
  const BoundParams& p = params;
  double d2 = p.delta * p.delta;
  switch (id) {
    case BoundId::T1:
      r.rhs = t1(p, need(in.initial_difference, "initial_difference", id));
      break;
    case BoundId::T2:
      r.K = lipschitz_aggregate(p, need(in.initial_lip_sum, "initial_lip_sum", id),
                       need(in.initial_sup_sum, "initial_sup_sum", id));
      r.rhs = t2(p, need(in.initial_difference, "initial_difference", id), r.K);
      break;
    case BoundId::T3:
      r.rhs = t3(p, need(in.kappa, "kappa", id));
      break;
    case BoundId::T4:
      r.rhs = t4(p, need(in.kappa, "kappa", id));
      break;
    case BoundId::C1: {
      r.K = lipschitz_aggregate(p, need(in.initial_lip_sum, "initial_lip_sum", id),
                       need(in.initial_sup_sum, "initial_sup_sum", id));
      double r1 = t2(p, need(in.initial_difference, "initial_difference", id), r.K);
      double r2 = t4(p, need(in.kappa, "kappa", id));
      double tail = mul(p.C * p.eps, std::exp(p.beta / d2 * p.T) * std::exp(32.0 * p.c_v * p.beta / d2 * p.t));
      r.rhs = 2.0 * (r1 + r2) + tail;
      break;
    }
    case BoundId::C2: {
      double r1 = t1(p, need(in.initial_difference, "initial_difference", id));
      double kappa = need(in.kappa, "kappa", id);
      double tail = mul(p.C * p.eps, std::exp(2.0 * p.c_v * p.beta / d2 * p.n * p.T));
      r.rhs = r1 / std::sqrt(static_cast<double>(p.n)) + chaos_term(p, kappa, 2.0 * p.c_v_low, 2.0 * p.c_v_low) + tail;
      break;
    }
  }
  return r;
}

}  // namespace dislab
