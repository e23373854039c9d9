#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <vector>

#include "sthm/randfield/symbol.hpp"

namespace sthm {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Counter-based stream id: same (master, stage, index) always gives the same seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stage, std::uint64_t index) {
  return splitmix64(splitmix64(splitmix64(master) ^ stage) ^ index);
}

template <int D>
struct FieldRealization {
  Grid<D> grid;
  std::vector<double> values;
  std::uint64_t seed = 0;
  std::shared_ptr<const SymbolSpec<D>> spec;
  double imag_residue = 0.0;  // max |Im| of the coloured field before taking the real part
};

// Per-cell N(0, 1/cellvol) white noise.
template <int D>
std::vector<double> white_noise(const Grid<D>& grid, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(grid.cell_volume()));
  std::vector<double> w(grid.size());
  for (auto& v : w) v = normal(rng);
  return w;
}

template <int D>
std::vector<cplx> white_noise_spectrum(const Grid<D>& grid, std::uint64_t seed) {
  return fft_field<D>(grid, white_noise<D>(grid, seed), FftDirection::forward);
}

// Spectrum of the same continuum noise on a coarser grid with the same box.
// Axes at the coarse Nyquist index combine the fine ±ξ_N modes so the result stays Hermitian.
template <int D>
std::vector<cplx> restrict_noise_spectrum(const Grid<D>& fine, const std::vector<cplx>& spectrum,
                                          const Grid<D>& coarse) {
  if (fine.side() != coarse.side() || coarse.n() > fine.n())
    throw ConsistencyError("restriction needs the same box and a coarser grid");
  if (coarse.n() == fine.n()) return spectrum;
  const int shift = (fine.n() - coarse.n()) / 2;
  std::vector<cplx> out(coarse.size());
  for (std::size_t f = 0; f < coarse.size(); ++f) {
    const Index<D> J = coarse.unflatten(f);
    int nyq = 0;
    for (int a = 0; a < D; ++a) nyq += (J[a] == 0);
    cplx acc = 0.0;
    for (int mask = 0; mask < (1 << nyq); ++mask) {
      Index<D> I;
      int bit = 0;
      for (int a = 0; a < D; ++a) {
        if (J[a] == 0) {
          I[a] = (mask >> bit++) & 1 ? fine.n() / 2 + coarse.n() / 2 : shift;
        } else {
          I[a] = J[a] + shift;
        }
      }
      acc += spectrum[fine.flatten(I)];
    }
    out[f] = acc / std::sqrt(static_cast<double>(1 << nyq));
  }
  return out;
}

// f = √h · F^{-1}[(δ²+|ξ|²)^{-m/4} Ŵ], with the spectral filter and √h cached per grid.
template <int D>
class Sampler {
 public:
  Sampler(std::shared_ptr<const SymbolSpec<D>> spec, const Grid<D>& grid)
      : spec_(std::move(spec)),
        grid_(grid),
        filter_(grid.size()),
        sqrt_h_(grid.size()),
        radial_(grid, [this](double rho) { return std::sqrt(spec_->stationary(rho)); }) {
    const auto& h = spec_->strength();
    if (!(h.grid == grid)) throw ConsistencyError("strength and sampling grids differ");
    for (std::size_t f = 0; f < grid.size(); ++f) {
      filter_[f] = std::sqrt(spec_->stationary(norm(grid.frequency(f))));
      sqrt_h_[f] = std::sqrt(h.values[f]);
    }
  }

  const Grid<D>& grid() const { return grid_; }

  FieldRealization<D> colour(std::vector<cplx> spectrum, std::uint64_t seed = 0) const {
    for (std::size_t f = 0; f < grid_.size(); ++f) spectrum[f] *= filter_[f];
    const auto g = fft_field<D>(grid_, spectrum, FftDirection::inverse);
    FieldRealization<D> r{grid_, std::vector<double>(grid_.size()), seed, spec_, 0.0};
    for (std::size_t f = 0; f < grid_.size(); ++f) {
      r.imag_residue = std::max(r.imag_residue, std::abs(g[f].imag()));
      r.values[f] = sqrt_h_[f] > 0.0 ? sqrt_h_[f] * g[f].real() : 0.0;
    }
    return r;
  }

  // Same field as colour(white_noise_spectrum(seed)) up to rounding, via real half-spectrum transforms.
  FieldRealization<D> sample(std::uint64_t seed) const {
    FieldRealization<D> r{grid_, white_noise<D>(grid_, seed), seed, spec_, 0.0};
    radial_.apply(r.values);
    for (std::size_t f = 0; f < grid_.size(); ++f) r.values[f] = sqrt_h_[f] > 0.0 ? sqrt_h_[f] * r.values[f] : 0.0;
    return r;
  }

 private:
  std::shared_ptr<const SymbolSpec<D>> spec_;
  Grid<D> grid_;
  std::vector<double> filter_;
  std::vector<double> sqrt_h_;
  RadialFilter<D> radial_;
};

template <int D>
FieldRealization<D> colour_noise(std::shared_ptr<const SymbolSpec<D>> spec, const Grid<D>& grid,
                                 std::vector<cplx> spectrum, std::uint64_t seed = 0) {
  return Sampler<D>(std::move(spec), grid).colour(std::move(spectrum), seed);
}

template <int D>
FieldRealization<D> sample_realization(std::shared_ptr<const SymbolSpec<D>> spec, const Grid<D>& grid,
                                       std::uint64_t seed) {
  return Sampler<D>(std::move(spec), grid).sample(seed);
}

}  // namespace sthm
