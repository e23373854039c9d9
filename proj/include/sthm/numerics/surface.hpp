#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "sthm/numerics/grid.hpp"

namespace sthm {

template <int D>
struct SurfaceGrid {
  double radius = 0.0;
  std::vector<Point<D>> nodes;
  std::vector<Point<D>> normals;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
};

namespace detail {

// P_n(z) and P_n'(z) by the three-term recurrence.
inline void legendre(int n, double z, double& p, double& dp) {
  double p0 = 1.0;
  double p1 = z;
  for (int k = 2; k <= n; ++k) {
    double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  p = p1;
  dp = n * (z * p1 - p0) / (z * z - 1.0);
}

}  // namespace detail

// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double p = 0.0;
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      detail::legendre(n, z, p, dp);
      const double dz = p / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    detail::legendre(n, z, p, dp);
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
}

inline int surface_nodes_per_circle(double R, double k) {
  return std::max(64, static_cast<int>(std::ceil(10.0 * k * R)));
}

// n nodes per great circle: uniform angles (2D); n longitudes times ceil(n/2) Gauss latitudes (3D).
template <int D>
SurfaceGrid<D> make_surface_grid_with(double R, int n) {
  if (!(R > 0.0)) throw DomainError("surface radius must be positive");
  if (n < 4) throw DomainError("surface grid needs at least 4 nodes per circle");
  SurfaceGrid<D> s;
  s.radius = R;
  const double two_pi = 2.0 * std::numbers::pi;
  if constexpr (D == 2) {
    for (int i = 0; i < n; ++i) {
      const double phi = two_pi * i / n;
      Point<2> nu{std::cos(phi), std::sin(phi)};
      s.normals.push_back(nu);
      s.nodes.push_back(R * nu);
      s.weights.push_back(two_pi * R / n);
    }
  } else {
    const int nlat = (n + 1) / 2;
    std::vector<double> ct, wt;
    gauss_legendre(nlat, ct, wt);
    for (int a = 0; a < nlat; ++a) {
      const double st = std::sqrt(std::max(0.0, 1.0 - ct[a] * ct[a]));
      for (int b = 0; b < n; ++b) {
        const double phi = two_pi * b / n;
        Point<3> nu{st * std::cos(phi), st * std::sin(phi), ct[a]};
        s.normals.push_back(nu);
        s.nodes.push_back(R * nu);
        s.weights.push_back(R * R * wt[a] * two_pi / n);
      }
    }
  }
  return s;
}

template <int D>
SurfaceGrid<D> make_surface_grid(double R, double k) {
  if (!(R > 0.0)) throw DomainError("surface radius must be positive");
  return make_surface_grid_with<D>(R, surface_nodes_per_circle(R, k));
}

}  // namespace sthm
