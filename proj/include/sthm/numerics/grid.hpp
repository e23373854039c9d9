#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <string>

#include "sthm/numerics/errors.hpp"

namespace sthm {

using cplx = std::complex<double>;

template <int D>
using Point = std::array<double, D>;

template <int D>
using Index = std::array<int, D>;

template <std::size_t N>
double dot(const std::array<double, N>& a, const std::array<double, N>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < N; ++i) s += a[i] * b[i];
  return s;
}

template <std::size_t N>
double norm(const std::array<double, N>& a) {
  return std::sqrt(dot(a, a));
}

template <std::size_t N>
std::array<double, N> operator-(const std::array<double, N>& a, const std::array<double, N>& b) {
  std::array<double, N> r;
  for (std::size_t i = 0; i < N; ++i) r[i] = a[i] - b[i];
  return r;
}

template <std::size_t N>
std::array<double, N> operator+(const std::array<double, N>& a, const std::array<double, N>& b) {
  std::array<double, N> r;
  for (std::size_t i = 0; i < N; ++i) r[i] = a[i] + b[i];
  return r;
}

template <std::size_t N>
std::array<double, N> operator*(double s, const std::array<double, N>& a) {
  std::array<double, N> r;
  for (std::size_t i = 0; i < N; ++i) r[i] = s * a[i];
  return r;
}

inline bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

// Periodic box [-L/2, L/2)^D with n cells per axis; node i sits at (i - n/2) h.
template <int D>
class Grid {
  static_assert(D == 2 || D == 3, "dimension must be 2 or 3");

 public:
  Grid(int n, double L) : n_(n), L_(L) {
    if (!is_power_of_two(n) || n < 8)
      throw UnsupportedSize("grid size must be a power of two >= 8, got " + std::to_string(n));
    if (!(L > 0.0)) throw DomainError("box side must be positive");
    while ((1 << bits_) < n) ++bits_;
  }

  static constexpr int dim() { return D; }
  int n() const { return n_; }
  double side() const { return L_; }
  double spacing() const { return L_ / n_; }
  double cell_volume() const { return std::pow(spacing(), D); }
  double dual_spacing() const { return 2.0 * std::numbers::pi / L_; }
  double dual_cell_volume() const { return std::pow(dual_spacing(), D); }

  std::size_t size() const {
    std::size_t s = 1;
    for (int i = 0; i < D; ++i) s *= static_cast<std::size_t>(n_);
    return s;
  }

  Index<D> unflatten(std::size_t f) const {
    Index<D> idx;
    for (int a = D - 1; a >= 0; --a) {
      idx[a] = static_cast<int>(f % n_);
      f /= n_;
    }
    return idx;
  }

  std::size_t flatten(const Index<D>& idx) const {
    std::size_t f = 0;
    for (int a = 0; a < D; ++a) f = f * n_ + static_cast<std::size_t>(idx[a]);
    return f;
  }

  double coordinate(int i) const { return (i - n_ / 2) * spacing(); }
  double frequency_coordinate(int j) const { return (j - n_ / 2) * dual_spacing(); }

  Point<D> point(std::size_t f) const {
    Index<D> idx = unflatten(f);
    Point<D> p;
    for (int a = 0; a < D; ++a) p[a] = coordinate(idx[a]);
    return p;
  }

  Point<D> frequency(std::size_t f) const {
    Index<D> idx = unflatten(f);
    Point<D> p;
    for (int a = 0; a < D; ++a) p[a] = frequency_coordinate(idx[a]);
    return p;
  }

  // Cell whose center is nearest to x, per axis, wrapped into the box.
  Index<D> locate(const Point<D>& x) const {
    Index<D> idx;
    for (int a = 0; a < D; ++a) {
      long i = std::lround(x[a] / spacing()) + n_ / 2;
      idx[a] = static_cast<int>(((i % n_) + n_) % n_);
    }
    return idx;
  }

  // Lattice frequency nearest to ξ, per axis, wrapped.
  Index<D> locate_frequency(const Point<D>& xi) const {
    Index<D> idx;
    for (int a = 0; a < D; ++a) {
      long j = std::lround(xi[a] / dual_spacing()) + n_ / 2;
      idx[a] = static_cast<int>(((j % n_) + n_) % n_);
    }
    return idx;
  }

  // Flat index of the frequency -ξ_j; the most negative frequency maps to itself.
  std::size_t partner(std::size_t f) const {
    Index<D> idx = unflatten(f);
    for (int a = 0; a < D; ++a) idx[a] = (n_ - idx[a]) % n_;
    return flatten(idx);
  }

  // Parity of the index sum; n is a power of two so each axis index is a bit field of f.
  int parity(std::size_t f) const {
    std::size_t x = f;
    for (int a = 1; a < D; ++a) x ^= f >> (a * bits_);
    return static_cast<int>(x & 1u);
  }

  bool operator==(const Grid& o) const { return n_ == o.n_ && L_ == o.L_; }

 private:
  int n_;
  double L_;
  int bits_ = 0;
};

}  // namespace sthm
