#pragma once

#include <cmath>
#include <complex>

namespace sthm {

// Running mean and Σ|z - mean|² of complex samples; blocks merge in a fixed order.
struct ComplexStats {
  double n = 0.0;
  std::complex<double> mean = 0.0;
  double m2 = 0.0;

  void add(std::complex<double> z) {
    n += 1.0;
    const std::complex<double> d = z - mean;
    mean += d / n;
    m2 += std::real(std::conj(d) * (z - mean));
  }

  void merge(const ComplexStats& o) {
    if (o.n == 0.0) return;
    if (n == 0.0) {
      *this = o;
      return;
    }
    const double total = n + o.n;
    const std::complex<double> d = o.mean - mean;
    mean += d * (o.n / total);
    m2 += o.m2 + std::norm(d) * n * o.n / total;
    n = total;
  }

  double std_error() const { return n > 1.0 ? std::sqrt(std::max(0.0, m2) / ((n - 1.0) * n)) : 0.0; }
};

}  // namespace sthm
