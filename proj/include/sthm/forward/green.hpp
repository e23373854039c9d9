#pragma once

#include <cmath>
#include <complex>
#include <numbers>

#include "sthm/numerics/grid.hpp"
#include "sthm/numerics/special.hpp"

namespace sthm {

// Φ(r): (i/4) H0(kr) in 2D, e^{ikr}/(4πr) in 3D.  Negative k gives the conjugate.
template <int D>
cplx green_radial(double k, double r) {
  if (k < 0.0) return std::conj(green_radial<D>(-k, r));
  if (!(k > 0.0)) throw DomainError("wavenumber must be nonzero");
  if (!(r > 0.0)) throw SingularityError("Green function evaluated at its singularity");
  if constexpr (D == 2) return cplx(0.0, 0.25) * hankel1_0(k * r);
  else return std::polar(1.0 / (4.0 * std::numbers::pi * r), k * r);
}

// dΦ/dr.
template <int D>
cplx green_radial_derivative(double k, double r) {
  if (k < 0.0) return std::conj(green_radial_derivative<D>(-k, r));
  if (!(k > 0.0)) throw DomainError("wavenumber must be nonzero");
  if (!(r > 0.0)) throw SingularityError("Green function evaluated at its singularity");
  if constexpr (D == 2) return cplx(0.0, -0.25 * k) * hankel1_1(k * r);
  else return std::polar(1.0 / (4.0 * std::numbers::pi * r * r), k * r) * cplx(-1.0, k * r);
}

// Φ - Φ_sing at r = 0, where Φ_sing is the k-independent singular part.
template <int D>
cplx green_regular_part(double k) {
  using std::numbers::pi;
  if (k < 0.0) return std::conj(green_regular_part<D>(-k));
  if constexpr (D == 2) return cplx(-(std::log(0.5 * k) + std::numbers::egamma) / (2.0 * pi), 0.25);
  else return cplx(0.0, k / (4.0 * pi));
}

template <int D>
cplx green(double k, const Point<D>& x, const Point<D>& y) {
  return green_radial<D>(k, norm(x - y));
}

template <int D>
std::array<cplx, D> green_gradient(double k, const Point<D>& x, const Point<D>& y) {
  const Point<D> z = x - y;
  const double r = norm(z);
  const cplx dr = green_radial_derivative<D>(k, r);
  std::array<cplx, D> g;
  for (int a = 0; a < D; ++a) g[a] = dr * (z[a] / r);
  return g;
}

// ν(x)·∇_x Φ(x,y) with ν(x) = x/|x| on a sphere centered at the origin.
template <int D>
cplx dgreen_dnu(double k, const Point<D>& x, const Point<D>& y) {
  const Point<D> z = x - y;
  const double r = norm(z);
  const double rx = norm(x);
  if (!(rx > 0.0)) throw DomainError("normal undefined at the origin");
  return green_radial_derivative<D>(k, r) * (dot(x, z) / (rx * r));
}

}  // namespace sthm
