#pragma once

#include <fftw3.h>

#include <complex>
#include <cstring>
#include <map>
#include <mutex>
#include <tuple>
#include <vector>

#include "sthm/numerics/grid.hpp"

namespace sthm {

enum class FftDirection { forward, inverse };

namespace detail {

class FftwBuffer {
 public:
  explicit FftwBuffer(std::size_t n) : n_(n), p_(fftw_alloc_complex(n)) {
    if (!p_) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(p_); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;

  std::complex<double>* data() { return reinterpret_cast<std::complex<double>*>(p_); }
  fftw_complex* raw() { return p_; }
  std::size_t size() const { return n_; }

 private:
  std::size_t n_;
  fftw_complex* p_;
};

// Plans are created once per (dimension, size, sign); the planner itself is not thread-safe.
inline fftw_plan fftw_plan_for(int d, int n, int sign) {
  static std::mutex mu;
  static std::map<std::tuple<int, int, int>, fftw_plan> plans;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_tuple(d, n, sign);
  auto it = plans.find(key);
  if (it != plans.end()) return it->second;
  std::size_t total = 1;
  for (int a = 0; a < d; ++a) total *= static_cast<std::size_t>(n);
  FftwBuffer buf(total);
  int dims[3] = {n, n, n};
  fftw_plan p = fftw_plan_dft(d, dims, buf.raw(), buf.raw(), sign, FFTW_ESTIMATE);
  plans.emplace(key, p);
  return p;
}

// Real-data transforms on an n^d box: kind 0 is r2c, kind 1 is c2r.
inline fftw_plan fftw_real_plan_for(int d, int n, int kind) {
  static std::mutex mu;
  static std::map<std::tuple<int, int, int>, fftw_plan> plans;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_tuple(d, n, kind);
  auto it = plans.find(key);
  if (it != plans.end()) return it->second;
  std::size_t total = 1;
  for (int a = 0; a < d; ++a) total *= static_cast<std::size_t>(n);
  double* r = fftw_alloc_real(total);
  FftwBuffer c(total / n * (n / 2 + 1));
  int dims[3] = {n, n, n};
  fftw_plan p = kind == 0 ? fftw_plan_dft_r2c(d, dims, r, c.raw(), FFTW_ESTIMATE)
                          : fftw_plan_dft_c2r(d, dims, c.raw(), r, FFTW_ESTIMATE);
  fftw_free(r);
  plans.emplace(key, p);
  return p;
}

}  // namespace detail

// Periodic convolution of real grid data with a radial real multiplier m(|ξ|), using half spectra.
template <int D>
class RadialFilter {
 public:
  template <typename F>
  RadialFilter(const Grid<D>& grid, F&& multiplier) : n_(grid.n()) {
    const int half = n_ / 2 + 1;
    const double dxi = grid.dual_spacing();
    std::size_t total = static_cast<std::size_t>(half);
    for (int a = 1; a < D; ++a) total *= static_cast<std::size_t>(n_);
    weights_.resize(total);
    const double scale = 1.0 / static_cast<double>(grid.size());
    for (std::size_t f = 0; f < total; ++f) {
      std::size_t rest = f;
      double r2 = 0.0;
      for (int a = D - 1; a >= 0; --a) {
        const int len = a == D - 1 ? half : n_;
        const int p = static_cast<int>(rest % len);
        rest /= len;
        const int sp = p < n_ / 2 ? p : p - n_;
        r2 += (sp * dxi) * (sp * dxi);
      }
      weights_[f] = scale * multiplier(std::sqrt(r2));
    }
  }

  void apply(std::vector<double>& values) const {
    std::size_t total = 1;
    for (int a = 0; a < D; ++a) total *= static_cast<std::size_t>(n_);
    if (values.size() != total) throw ConsistencyError("filter: value count does not match grid");
    double* r = fftw_alloc_real(total);
    detail::FftwBuffer c(weights_.size());
    std::memcpy(r, values.data(), total * sizeof(double));
    fftw_execute_dft_r2c(detail::fftw_real_plan_for(D, n_, 0), r, c.raw());
    cplx* z = c.data();
    for (std::size_t f = 0; f < weights_.size(); ++f) z[f] *= weights_[f];
    fftw_execute_dft_c2r(detail::fftw_real_plan_for(D, n_, 1), c.raw(), r);
    std::memcpy(values.data(), r, total * sizeof(double));
    fftw_free(r);
  }

 private:
  int n_;
  std::vector<double> weights_;
};

// Forward: v̂(ξ_j) ≈ Σ_i v(x_i) e^{-i x_i·ξ_j} h^D.  Inverse: v(x_i) ≈ L^{-D} Σ_j v̂(ξ_j) e^{i x_i·ξ_j}.
// Both live on centered grids; the (-1)^{|i|} twiddles shift the index origin to n/2.
template <int D>
std::vector<cplx> fft_field(const Grid<D>& grid, const std::vector<cplx>& values, FftDirection dir) {
  const std::size_t total = grid.size();
  if (values.size() != total) throw ConsistencyError("fft_field: value count does not match grid");
  detail::FftwBuffer buf(total);
  cplx* b = buf.data();
  for (std::size_t f = 0; f < total; ++f) b[f] = grid.parity(f) ? -values[f] : values[f];
  const int sign = dir == FftDirection::forward ? FFTW_FORWARD : FFTW_BACKWARD;
  fftw_execute_dft(detail::fftw_plan_for(D, grid.n(), sign), buf.raw(), buf.raw());
  const double scale = dir == FftDirection::forward ? grid.cell_volume() : 1.0 / std::pow(grid.side(), D);
  std::vector<cplx> out(total);
  for (std::size_t f = 0; f < total; ++f) out[f] = (grid.parity(f) ? -scale : scale) * b[f];
  return out;
}

template <int D>
std::vector<cplx> fft_field(const Grid<D>& grid, const std::vector<double>& values, FftDirection dir) {
  std::vector<cplx> c(values.begin(), values.end());
  return fft_field<D>(grid, c, dir);
}

}  // namespace sthm
