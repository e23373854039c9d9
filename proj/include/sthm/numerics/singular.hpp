#pragma once

#include <cmath>
#include <numbers>

#include "sthm/numerics/errors.hpp"

namespace sthm {

namespace constants {
// ∫ log|u| du over the unit square centered at the origin.
inline constexpr double kLogMeanSquare = -1.0611754268825243451;
// ∫ 1/|u| du over the unit cube centered at the origin.
inline constexpr double kInverseMeanCube = 2.3800773639795535066;
}  // namespace constants

// ∫ Φ_sing(|y|) dy over [-hc/2, hc/2]^d; Φ_sing = -(1/2π) log|y| (d=2), 1/(4π|y|) (d=3).
inline double singular_cell_weight(int d, double hc) {
  if (!(hc > 0.0)) throw DomainError("cell side must be positive");
  using std::numbers::pi;
  if (d == 2) return -hc * hc * (std::log(hc) + constants::kLogMeanSquare) / (2.0 * pi);
  if (d == 3) return hc * hc * constants::kInverseMeanCube / (4.0 * pi);
  throw DomainError("dimension must be 2 or 3");
}

}  // namespace sthm
