#pragma once

#include <cmath>
#include <memory>

#include "sthm/randfield/strength.hpp"

namespace sthm {

// c(x,ξ) = h(x) (δ² + |ξ|²)^{-m/2} with principal part h(x)|ξ|^{-m}.
template <int D>
class SymbolSpec {
 public:
  SymbolSpec(std::shared_ptr<const StrengthField<D>> h, double m, double delta = 1.0)
      : h_(std::move(h)), m_(m), delta_(delta) {
    if (!h_) throw DomainError("symbol needs a strength field");
    if (!(m > D - 1)) throw DomainError("assumption A violated: order m must exceed d-1");
    if (!(delta > 0.0)) throw DomainError("regularization delta must be positive");
    M_ = 2.0 * h_->max_value() * 0.5 * m_ * delta_ * delta_;
  }

  double m() const { return m_; }
  double delta() const { return delta_; }
  double M() const { return M_; }
  const StrengthField<D>& strength() const { return *h_; }
  const std::shared_ptr<const StrengthField<D>>& strength_ptr() const { return h_; }

  // (δ² + ρ²)^{-m/2}, the stationary factor.
  double stationary(double rho) const { return std::pow(delta_ * delta_ + rho * rho, -0.5 * m_); }
  double symbol(double hx, double rho) const { return hx * stationary(rho); }
  double principal(double hx, double rho) const { return hx * std::pow(rho, -m_); }
  double remainder(double hx, double rho) const { return symbol(hx, rho) - principal(hx, rho); }

  bool operator==(const SymbolSpec& o) const {
    return m_ == o.m_ && delta_ == o.delta_ &&
           (h_ == o.h_ || (h_->grid == o.h_->grid && h_->values == o.h_->values));
  }

 private:
  std::shared_ptr<const StrengthField<D>> h_;
  double m_;
  double delta_;
  double M_;
};

}  // namespace sthm
