#pragma once

#include <Eigen/Dense>

#include <array>
#include <vector>

#include "sthm/correlate/far.hpp"
#include "sthm/correlate/near.hpp"
#include "sthm/numerics/fft.hpp"
#include "sthm/randfield/covariance.hpp"

namespace sthm {

// Exact second moments of linear functionals of the sampled field, K_{cc'} = E[f_c f_{c'}] on the support.
template <int D>
class DiscreteCovariance {
 public:
  DiscreteCovariance(const SymbolSpec<D>& spec, const Grid<D>& grid)
      : grid_(grid), support_(support_of<D>(spec.strength())), power_(grid.size()) {
    for (std::size_t f = 0; f < grid.size(); ++f) power_[f] = spec.stationary(norm(grid.frequency(f)));
  }

  const SourceSupport<D>& support() const { return support_; }

  // K b for a coefficient vector over the support cells.
  Eigen::VectorXcd apply(const Eigen::VectorXcd& b) const {
    check(b);
    std::vector<cplx> v(grid_.size(), 0.0);
    for (std::size_t c = 0; c < support_.size(); ++c) v[support_.cells[c]] = support_.sqrt_h[c] * b[c];
    auto s = fft_field<D>(grid_, v, FftDirection::forward);
    for (std::size_t f = 0; f < grid_.size(); ++f) s[f] *= power_[f];
    const auto w = fft_field<D>(grid_, s, FftDirection::inverse);
    Eigen::VectorXcd out(support_.size());
    for (std::size_t c = 0; c < support_.size(); ++c)
      out[c] = support_.sqrt_h[c] * w[support_.cells[c]] / support_.cell_volume;
    return out;
  }

  // E[(a·f)(b·f)], unconjugated.
  cplx bilinear(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) const {
    check(a);
    return (a.transpose() * apply(b))(0);
  }

 private:
  void check(const Eigen::VectorXcd& v) const {
    if (static_cast<std::size_t>(v.size()) != support_.size())
      throw ConsistencyError("coefficient vector does not match the support size");
  }

  Grid<D> grid_;
  SourceSupport<D> support_;
  std::vector<double> power_;
};

// Σ_c Σ_c' a_c K_f(x_c, x_c') b_c' with the analytic covariance.
template <int D>
cplx analytic_bilinear(const SymbolSpec<D>& spec, const SourceSupport<D>& support, const Eigen::VectorXcd& a,
                       const Eigen::VectorXcd& b) {
  if (spec.m() <= D) throw DomainError("analytic double sum needs a bounded covariance (m > d)");
  cplx acc = 0.0;
  for (std::size_t c = 0; c < support.size(); ++c) {
    cplx row = 0.0;
    for (std::size_t e = 0; e < support.size(); ++e)
      row += b[e] * covariance_analytic<D>(spec, support.points[c], support.points[e]);
    acc += a[c] * row;
  }
  return acc;
}

// Rows e^{-ikθ·x_c} cellvol, so that a·f = f̂(kθ) on the support.
template <int D>
Eigen::VectorXcd fourier_row(const SourceSupport<D>& support, double k, const Point<D>& theta) {
  Eigen::VectorXcd r(support.size());
  for (std::size_t c = 0; c < support.size(); ++c)
    r[c] = support.cell_volume * std::polar(1.0, -k * dot(theta, support.points[c]));
  return r;
}

template <int D>
struct NearExact {
  std::array<cplx, 4> I{};
  cplx sum() const { return I[0] + I[1] + I[2] + I[3]; }
};

// Expected I1..I4 for the discretized pipeline: no sampling error, all quadrature effects retained.
template <int D>
NearExact<D> exact_near(const DiscreteCovariance<D>& cov, const SurfaceGrid<D>& surface, double k,
                        const Point<D>& theta1, const Point<D>& theta2) {
  const auto& sup = cov.support();
  const BoundaryOperator<D> op(sup.points, sup.cell_volume, surface, k);
  const NearFunctional<D> fn(surface, k, {theta1, theta2});
  const Eigen::VectorXcd a1 = (fn.a_weights().row(0) * op.dnu_matrix()).transpose();
  const Eigen::VectorXcd a2 = (fn.a_weights().row(1) * op.dnu_matrix()).transpose();
  const Eigen::VectorXcd b1 = (fn.b_weights().row(0) * op.u_matrix()).transpose();
  const Eigen::VectorXcd b2 = (fn.b_weights().row(1) * op.u_matrix()).transpose();
  const Eigen::VectorXcd ka2 = cov.apply(a2);
  const Eigen::VectorXcd kb2 = cov.apply(b2);
  NearExact<D> out;
  out.I[0] = (a1.transpose() * ka2)(0);
  out.I[1] = -(a1.transpose() * kb2)(0);
  out.I[2] = -(b1.transpose() * ka2)(0);
  out.I[3] = (b1.transpose() * kb2)(0);
  return out;
}

// Expected u^∞(x̂,(1+η)k)·conj(u^∞(x̂,k)) for the discretized pipeline.
template <int D>
cplx exact_far(const DiscreteCovariance<D>& cov, double k, double eta, const Point<D>& xhat) {
  const auto& sup = cov.support();
  const FarFieldOperator<D> lo(sup.points, sup.cell_volume, {xhat}, k);
  const FarFieldOperator<D> hi(sup.points, sup.cell_volume, {xhat}, (1.0 + eta) * k);
  const Eigen::VectorXcd a = hi.matrix().row(0).transpose();
  const Eigen::VectorXcd b = lo.matrix().row(0).conjugate().transpose();
  return cov.bilinear(a, b);
}

}  // namespace sthm
