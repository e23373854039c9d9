#pragma once

#include <cmath>
#include <complex>
#include <numbers>

#include "sthm/numerics/errors.hpp"

namespace sthm {

namespace detail {

inline constexpr double kSeriesThreshold = 8.0;

struct BesselPair {
  double j;
  double y;
};

inline void check_positive(double z) {
  if (!(z > 0.0) || !std::isfinite(z)) throw DomainError("Bessel argument must be positive and finite");
}

// Power series for J0, Y0 (z < kSeriesThreshold).
inline BesselPair series_order0(double z) {
  using std::numbers::egamma;
  using std::numbers::pi;
  const double q = 0.25 * z * z;
  double term = 1.0;
  double j = 1.0;
  double harmonic = 0.0;
  double ysum = 0.0;
  for (int k = 1; k < 80; ++k) {
    term *= -q / (static_cast<double>(k) * k);
    harmonic += 1.0 / k;
    j += term;
    ysum -= harmonic * term;
    if (std::abs(term) * (1.0 + harmonic) < 1e-18 * (std::abs(j) + std::abs(ysum))) break;
  }
  const double y = 2.0 / pi * ((std::log(0.5 * z) + egamma) * j + ysum);
  return {j, y};
}

// Power series for J1, Y1 (z < kSeriesThreshold).
inline BesselPair series_order1(double z) {
  using std::numbers::egamma;
  using std::numbers::pi;
  const double half = 0.5 * z;
  const double q = half * half;
  double term = half;  // (z/2)^{2k+1} / (k! (k+1)!)
  double j = term;
  double hk = 0.0;
  double hk1 = 1.0;
  double ysum = (hk + hk1) * term;
  for (int k = 1; k < 80; ++k) {
    term *= -q / (static_cast<double>(k) * (k + 1));
    hk += 1.0 / k;
    hk1 += 1.0 / (k + 1);
    j += term;
    ysum += (hk + hk1) * term;
    if (std::abs(term) * (1.0 + hk1) < 1e-18 * (std::abs(j) + std::abs(ysum))) break;
  }
  const double y = 2.0 / pi * (std::log(half) + egamma) * j - 2.0 / (pi * z) - ysum / pi;
  return {j, y};
}

// Hankel asymptotic expansion truncated at its smallest term.
inline std::complex<double> hankel_asymptotic(int nu, double z) {
  using std::numbers::pi;
  const double mu = 4.0 * nu * nu;
  std::complex<double> sum = 1.0;
  std::complex<double> term = 1.0;
  const std::complex<double> iz(0.0, 1.0 / z);
  double last = 1.0;
  for (int k = 1; k < 60; ++k) {
    const double odd = 2.0 * k - 1.0;
    std::complex<double> next = term * (mu - odd * odd) / (8.0 * k) * iz;
    const double mag = std::abs(next);
    if (mag >= last) break;
    term = next;
    sum += term;
    last = mag;
    if (mag < 1e-17) break;
  }
  const double phase = z - (0.5 * nu + 0.25) * pi;
  return std::sqrt(2.0 / (pi * z)) * std::polar(1.0, phase) * sum;
}

}  // namespace detail

inline std::complex<double> hankel1_0(double z) {
  detail::check_positive(z);
  if (z < detail::kSeriesThreshold) {
    auto p = detail::series_order0(z);
    return {p.j, p.y};
  }
  return detail::hankel_asymptotic(0, z);
}

inline std::complex<double> hankel1_1(double z) {
  detail::check_positive(z);
  if (z < detail::kSeriesThreshold) {
    auto p = detail::series_order1(z);
    return {p.j, p.y};
  }
  return detail::hankel_asymptotic(1, z);
}

inline double bessel_j0(double z) { return hankel1_0(z).real(); }
inline double bessel_y0(double z) { return hankel1_0(z).imag(); }
inline double bessel_j1(double z) { return hankel1_1(z).real(); }
inline double bessel_y1(double z) { return hankel1_1(z).imag(); }

}  // namespace sthm
