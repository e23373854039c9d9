#pragma once

#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include "sthm/numerics/errors.hpp"
#include "sthm/numerics/grid.hpp"
#include "sthm/numerics/surface.hpp"

namespace sthm {

// Unit θ₁, θ₂ with θ₁ + θ₂ = ξ/K, both at angle α from ξ̂ where cos α = |ξ|/(2K).
template <int D>
std::pair<Point<D>, Point<D>> direction_pair(const Point<D>& xi, double K) {
  if (!(K > 0.0)) throw DomainError("frequency cap must be positive");
  const double r = norm(xi);
  if (r > 2.0 * K * (1.0 + 1e-15)) throw DomainError("frequency lies outside the coverage disc |xi| <= 2K");
  Point<D> e1{};
  e1[0] = 1.0;
  if (r == 0.0) return {e1, -1.0 * e1};
  const Point<D> u = (1.0 / r) * xi;
  Point<D> p{};
  if constexpr (D == 2) {
    p = {-u[1], u[0]};
  } else {
    Point<D> ref{0.0, 0.0, 1.0};
    if (std::abs(u[2]) > 1.0 - 1e-12) ref = e1;
    p = ref - dot(ref, u) * u;
    p = (1.0 / norm(p)) * p;
  }
  const double c = std::min(1.0, r / (2.0 * K));
  const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
  return {c * u + s * p, c * u - s * p};
}

// Cartesian frequency lattice Δξ = q·2π/L with spatial period L/q kept at least 2·r_domain.
template <int D>
struct XiGrid {
  Grid<D> grid;
  double extent;
  int q;

  double spacing() const { return grid.dual_spacing(); }
  bool inside(std::size_t i) const { return norm(grid.frequency(i)) <= extent * (1.0 + 1e-12); }
};

template <int D>
XiGrid<D> make_xi_grid(double L, double rho, int n_xi, double r_domain) {
  if (!(rho > 0.0)) throw DomainError("spectrum extent must be positive");
  if (!(r_domain > 0.0) || 2.0 * r_domain > L) throw DomainError("reconstruction domain must fit in the box");
  const double base = 2.0 * std::numbers::pi / L;
  const int qmax = std::max(1, static_cast<int>(std::floor(L / (2.0 * r_domain))));
  const int qneed = std::max(1, static_cast<int>(std::ceil(rho / ((n_xi / 2 - 1) * base) - 1e-12)));
  const int q = std::min(qmax, qneed);
  Grid<D> g(n_xi, L / q);
  return {g, std::min(rho, (n_xi / 2 - 1) * g.dual_spacing()), q};
}

// Every cell of the dual lattice of a spatial grid, corners and Nyquist planes included.
template <int D>
XiGrid<D> full_xi_grid(const Grid<D>& grid) {
  return {grid, std::sqrt(static_cast<double>(D)) * (grid.n() / 2) * grid.dual_spacing(), 1};
}

// Polar far-field design: radii τ_j = jρ/n_τ and directions on the unit sphere.
template <int D>
struct PolarDesign {
  std::vector<double> radii;
  std::vector<Point<D>> directions;
  int n_azimuth = 0;
  std::vector<double> polar_angles;
};

template <int D>
PolarDesign<D> make_polar_design(double rho, double dxi, double density = 1.0) {
  if (!(rho > 0.0 && dxi > 0.0 && density > 0.0)) throw DomainError("polar design needs positive extent and spacing");
  PolarDesign<D> p;
  const int nt = std::max(2, static_cast<int>(std::ceil(density * rho / dxi)));
  for (int j = 1; j <= nt; ++j) p.radii.push_back(j * rho / nt);
  const int na = std::max(64, static_cast<int>(std::ceil(density * 2.0 * std::numbers::pi * rho / (2.0 * dxi))));
  p.n_azimuth = na;
  const auto s = make_surface_grid_with<D>(1.0, na);
  p.directions = s.nodes;
  if constexpr (D == 3) {
    for (std::size_t i = 0; i < s.nodes.size(); i += na) p.polar_angles.push_back(std::acos(s.nodes[i][2]));
  }
  return p;
}

}  // namespace sthm
