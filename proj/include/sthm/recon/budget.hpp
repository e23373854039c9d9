#pragma once

#include <cmath>
#include <numbers>

#include "sthm/numerics/errors.hpp"

namespace sthm {

struct StabilityBudget {
  double K = 0.0;
  double s = 1.0;
  double Q = 0.0;
  double M = 0.0;
  double R = 0.0;
  int d = 2;
  double epsilon = 0.0;
  double E = 0.0;
  double gamma = 0.0;
  double A = 0.0;

  bool in_regime() const { return epsilon < std::exp(-1.0); }
  double rho_cut() const { return 2.0 * std::pow(A, gamma); }
  double lipschitz_exponent(double m) const { return 2.0 * m + 2.0 * d / (d + 2.0 * s); }
  double log_exponent() const { return 8.0 * s / (3.0 * (2.0 * s + d)); }
};

// A = K^{2/3}E^{1/4}/((8R+5)π)^{1/3} when 2^{1/4}((8R+5)π)^{1/3}K^{1/3} < E^{1/4}, else A = K.
inline StabilityBudget make_budget(double K, double s, double Q, double M, double R, int d, double epsilon) {
  if (!(K > 0.0 && s > 0.0 && R > 0.0)) throw DomainError("budget needs positive K, s and R");
  if (!(epsilon > 0.0)) throw DomainError("data discrepancy must be positive");
  StabilityBudget b{K, s, Q, M, R, d, epsilon, std::abs(std::log(epsilon)), 2.0 / (2.0 * s + d), K};
  const double c = std::cbrt((8.0 * R + 5.0) * std::numbers::pi);
  if (std::pow(2.0, 0.25) * c * std::cbrt(K) < std::pow(b.E, 0.25)) b.A = std::pow(K, 2.0 / 3.0) * std::pow(b.E, 0.25) / c;
  return b;
}

}  // namespace sthm
