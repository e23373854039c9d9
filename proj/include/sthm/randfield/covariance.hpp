#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <utility>
#include <vector>

#include "sthm/randfield/sampling.hpp"

namespace sthm {

// G(r) = (2π)^{-d} ∫ e^{iz·ξ} (δ²+|ξ|²)^{-m/2} dξ at |z| = r (Matérn form).
inline double matern_covariance(int d, double m, double delta, double r) {
  using std::numbers::pi;
  const double nu = 0.5 * (m - d);
  if (r == 0.0) {
    if (nu <= 0.0) return std::numeric_limits<double>::infinity();
    return std::pow(4.0 * pi, -0.5 * d) * std::pow(delta, d - m) * std::tgamma(nu) / std::tgamma(0.5 * m);
  }
  const double pref = std::pow(2.0 * pi, -0.5 * d) * std::pow(2.0, 1.0 - 0.5 * m) / std::tgamma(0.5 * m);
  return pref * std::pow(r / delta, nu) * std::cyl_bessel_k(std::abs(nu), delta * r);
}

// K_f(x,y) = √h(x) √h(y) G(|x-y|).
template <int D>
double covariance_analytic(const SymbolSpec<D>& spec, const Point<D>& x, const Point<D>& y) {
  const auto& h = spec.strength();
  const double hx = h.at(x);
  const double hy = h.at(y);
  if (hx == 0.0 || hy == 0.0) return 0.0;
  return std::sqrt(hx * hy) * matern_covariance(D, spec.m(), spec.delta(), norm(x - y));
}

// Covariance of the sampled stationary factor at lag z: L^{-d} Σ_j σ_j² e^{iz·ξ_j}.
template <int D>
double discrete_covariance(const SymbolSpec<D>& spec, const Grid<D>& grid, const Point<D>& z) {
  double acc = 0.0;
  for (std::size_t f = 0; f < grid.size(); ++f) {
    const Point<D> xi = grid.frequency(f);
    acc += spec.stationary(norm(xi)) * std::cos(dot(z, xi));
  }
  return acc / std::pow(grid.side(), D);
}

struct CovarianceEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

// Sample mean of f(x)f(y) and its standard error, in list order.
template <int D>
std::vector<CovarianceEstimate> empirical_covariance(const std::vector<FieldRealization<D>>& realizations,
                                                     const std::vector<std::pair<Point<D>, Point<D>>>& pairs) {
  if (realizations.size() < 2) throw ConsistencyError("empirical covariance needs at least 2 realizations");
  const auto& first = realizations.front();
  for (const auto& r : realizations) {
    if (!(r.grid == first.grid) || !r.spec || !first.spec || !(*r.spec == *first.spec))
      throw ConsistencyError("realizations do not share one spec and grid");
  }
  std::vector<CovarianceEstimate> out;
  const double n = static_cast<double>(realizations.size());
  for (const auto& [x, y] : pairs) {
    const std::size_t ix = first.grid.flatten(first.grid.locate(x));
    const std::size_t iy = first.grid.flatten(first.grid.locate(y));
    double mean = 0.0;
    double m2 = 0.0;
    double count = 0.0;
    for (const auto& r : realizations) {
      const double p = r.values[ix] * r.values[iy];
      count += 1.0;
      const double delta = p - mean;
      mean += delta / count;
      m2 += delta * (p - mean);
    }
    out.push_back({mean, std::sqrt(m2 / (n - 1.0) / n)});
  }
  return out;
}

}  // namespace sthm
