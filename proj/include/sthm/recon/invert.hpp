#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "sthm/numerics/fft.hpp"
#include "sthm/randfield/strength.hpp"
#include "sthm/recon/spectrum.hpp"

namespace sthm {

template <int D>
struct GridField {
  Grid<D> grid;
  std::vector<double> values;
};

template <int D>
struct ReconstructionResult {
  GridField<D> field;
  double rho_cut = 0.0;
  bool taper = true;
  double imag_ratio = 0.0;
  std::size_t absent_filled = 0;
  double K = 0.0;
  std::size_t N = 0;
  double l2_error = std::numeric_limits<double>::quiet_NaN();
};

inline double cutoff_weight(double r, double rho_cut, bool taper) {
  if (r > rho_cut * (1.0 + 1e-12)) return 0.0;
  if (!taper) return 1.0;
  const double a = 0.8 * rho_cut;
  if (r <= a) return 1.0;
  return 0.5 * (1.0 + std::cos(std::numbers::pi * (r - a) / (rho_cut - a)));
}

// Low-pass inverse transform; absent cells inside the cutoff are zero-filled and counted.
template <int D>
ReconstructionResult<D> invert_spectrum(const SpectrumEstimate<D>& s, double rho_cut, bool taper = true) {
  if (!(rho_cut > 0.0)) throw DomainError("truncation radius must be positive");
  if (rho_cut > s.extent() * (1.0 + 1e-12)) throw DomainError("truncation radius exceeds the spectrum extent");
  const auto& g = s.grid();
  std::vector<cplx> v(g.size(), 0.0);
  std::size_t absent = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double w = cutoff_weight(norm(g.frequency(i)), rho_cut, taper);
    if (w == 0.0) continue;
    if (!s.present[i]) {
      ++absent;
      continue;
    }
    v[i] = w * s.values[i];
  }
  const auto f = fft_field<D>(g, v, FftDirection::inverse);
  ReconstructionResult<D> r{{g, std::vector<double>(g.size())}, rho_cut, taper, 0.0, absent, s.K, s.N};
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    r.field.values[i] = f[i].real();
    re += f[i].real() * f[i].real();
    im += f[i].imag() * f[i].imag();
  }
  r.imag_ratio = re > 0.0 ? std::sqrt(im / re) : 0.0;
  return r;
}

template <int D>
GridField<D> sample_strength(const StrengthField<D>& h, const Grid<D>& grid) {
  GridField<D> out{grid, std::vector<double>(grid.size())};
  for (std::size_t i = 0; i < grid.size(); ++i) out.values[i] = h.at(grid.point(i));
  return out;
}

// Cell-volume weighted L² norm of a − b over the ball of radius r_domain.
template <int D>
double l2_error(const GridField<D>& a, const GridField<D>& b, double r_domain) {
  if (!(a.grid == b.grid) || a.values.size() != b.values.size()) throw ConsistencyError("fields live on different grids");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    if (norm(a.grid.point(i)) > r_domain) continue;
    const double d = a.values[i] - b.values[i];
    acc += d * d;
  }
  return std::sqrt(acc * a.grid.cell_volume());
}

}  // namespace sthm
