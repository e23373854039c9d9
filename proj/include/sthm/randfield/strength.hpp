#pragma once

#include <cmath>
#include <memory>
#include <vector>

#include "sthm/numerics/fft.hpp"

namespace sthm {

inline double bump_profile(double r, double r0, double amplitude) {
  const double t = r / r0;
  if (t >= 1.0) return 0.0;
  return amplitude * std::exp(1.0 - 1.0 / (1.0 - t * t));
}

// Discrete H^s norm: ((2π)^{-d} Σ (1+|ξ|²)^s |v̂(ξ)|² Δξ^d)^{1/2}.
template <int D>
double sobolev_norm(const Grid<D>& grid, const std::vector<double>& values, double s) {
  const auto spec = fft_field<D>(grid, values, FftDirection::forward);
  double acc = 0.0;
  for (std::size_t f = 0; f < grid.size(); ++f) {
    const Point<D> xi = grid.frequency(f);
    acc += std::pow(1.0 + dot(xi, xi), s) * std::norm(spec[f]);
  }
  return std::sqrt(acc * grid.dual_cell_volume() / std::pow(2.0 * std::numbers::pi, D));
}

template <int D>
struct StrengthField {
  Grid<D> grid;
  std::vector<double> values;
  double r0;
  double amplitude;
  double s;
  double Q;

  double at(const Point<D>& x) const { return bump_profile(norm(x), r0, amplitude); }
  double max_value() const { return amplitude; }

  double integral() const {
    double acc = 0.0;
    for (double v : values) acc += v;
    return acc * grid.cell_volume();
  }

  // Grid-sum transform Σ h(x_c) e^{-iξ·x_c} h^D at an arbitrary frequency.
  cplx transform(const Point<D>& xi) const {
    cplx acc = 0.0;
    for (std::size_t f = 0; f < values.size(); ++f) {
      if (values[f] == 0.0) continue;
      acc += values[f] * std::polar(1.0, -dot(xi, grid.point(f)));
    }
    return acc * grid.cell_volume();
  }
};

// h(x) = amplitude exp(1 - 1/(1 - |x/r0|²)) inside |x| < r0.
template <int D>
std::shared_ptr<const StrengthField<D>> make_strength(const Grid<D>& grid, double r0, double amplitude,
                                                      double s = 1.0) {
  if (!(r0 > 0.0)) throw DomainError("support radius must be positive");
  if (r0 >= grid.side() / 4.0) throw GeometryError("support radius must be below L/4");
  if (!(amplitude >= 0.0)) throw DomainError("amplitude must be nonnegative");
  std::vector<double> v(grid.size());
  for (std::size_t f = 0; f < v.size(); ++f) v[f] = bump_profile(norm(grid.point(f)), r0, amplitude);
  const double Q = sobolev_norm<D>(grid, v, s);
  return std::make_shared<const StrengthField<D>>(StrengthField<D>{grid, std::move(v), r0, amplitude, s, Q});
}

// Cells where h > 0, with their centers and √h.
template <int D>
struct SourceSupport {
  std::vector<std::size_t> cells;
  std::vector<Point<D>> points;
  std::vector<double> sqrt_h;
  double cell_volume = 0.0;
  double radius = 0.0;

  std::size_t size() const { return cells.size(); }
};

template <int D>
SourceSupport<D> support_of(const StrengthField<D>& h) {
  SourceSupport<D> s;
  s.cell_volume = h.grid.cell_volume();
  for (std::size_t f = 0; f < h.values.size(); ++f) {
    if (h.values[f] > 0.0) {
      s.cells.push_back(f);
      s.points.push_back(h.grid.point(f));
      s.sqrt_h.push_back(std::sqrt(h.values[f]));
      s.radius = std::max(s.radius, norm(s.points.back()));
    }
  }
  return s;
}

}  // namespace sthm
