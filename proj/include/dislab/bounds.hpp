#pragma once

#include <optional>
#include <string>

namespace dislab {

enum class BoundId { T1, T2, T3, T4, C1, C2 };
std::string to_string(BoundId id);
BoundId bound_from_string(const std::string& s);

struct BoundParams {
  double eps = 0.0;
  int n = 1;
  double beta = 1.0;
  double delta = 0.25;
  double t = 0.0;
  double T = 0.0;
  double C = 1.0, C1 = 1.0, C2 = 1.0;  // the unnamed constants C, C', C''
  double c_v = 1.0;      // orders 0..5, used by T1, T2, C1 and the tail of C2
  double c_v_low = 1.0;  // orders 0..2, used by T3 and the mean-field term of C2
};

// Data-dependent inputs; each bound needs a subset.
struct BoundInputs {
  std::optional<double> initial_difference;  // T1, T2 (and C1, C2 through them)
  std::optional<double> kappa;               // T3, T4, C1, C2
  // Sums over both species of ||d rho0/d nu||_{1,inf} and ||d rho0/d nu||_inf (T2, C1).
  std::optional<double> initial_lip_sum;
  std::optional<double> initial_sup_sum;
};

struct BoundReport {
  BoundId id = BoundId::T1;
  BoundParams params;
  double gamma = 0.0;  // 16 c_v^2 beta n^2 / delta^2
  double K = 0.0;      // Lipschitz aggregate of the T2 bound, when it applies
  double rhs = 0.0;
  std::optional<double> lhs;  // measured value paired with the bound, if any
};

// Literal evaluation of the right-hand side. Throws std::invalid_argument when
// a required input is missing. Products 0 * inf evaluate to 0.
BoundReport bound_rhs(BoundId id, const BoundParams& params, const BoundInputs& inputs);

double gamma_constant(double c_v, double beta, int n, double delta);

}  // namespace dislab
