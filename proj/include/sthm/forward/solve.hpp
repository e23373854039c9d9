#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <memory>
#include <optional>
#include <vector>

#include "sthm/forward/green.hpp"
#include "sthm/numerics/singular.hpp"
#include "sthm/numerics/surface.hpp"
#include "sthm/randfield/sampling.hpp"

namespace sthm {

namespace detail {

// Flat index of the cell containing x, if x lies in the box.
template <int D>
std::optional<std::size_t> containing_cell(const Grid<D>& grid, const Point<D>& x) {
  Index<D> idx;
  for (int a = 0; a < D; ++a) {
    const long i = std::lround(x[a] / grid.spacing()) + grid.n() / 2;
    if (i < 0 || i >= grid.n()) return std::nullopt;
    idx[a] = static_cast<int>(i);
  }
  return grid.flatten(idx);
}

template <int D>
double support_radius(const FieldRealization<D>& f) {
  if (f.spec) return f.spec->strength().r0;
  double r = 0.0;
  for (std::size_t c = 0; c < f.values.size(); ++c)
    if (f.values[c] != 0.0) r = std::max(r, norm(f.grid.point(c)) + 0.5 * std::sqrt(D) * f.grid.spacing());
  return r;
}

}  // namespace detail

// u(x) = -Σ_c Φ(x, y_c) f(y_c) h^D; the cell containing x uses its exact singular mean.
template <int D>
std::vector<cplx> solve_u(const FieldRealization<D>& f, double k, const std::vector<Point<D>>& points) {
  const Grid<D>& g = f.grid;
  const double vol = g.cell_volume();
  const double wsing = singular_cell_weight(D, g.spacing());
  const cplx regular = green_regular_part<D>(k);
  std::vector<cplx> out(points.size());
  for (std::size_t p = 0; p < points.size(); ++p) {
    const auto own = detail::containing_cell<D>(g, points[p]);
    cplx acc = 0.0;
    for (std::size_t c = 0; c < f.values.size(); ++c) {
      const double fc = f.values[c];
      if (fc == 0.0) continue;
      if (own && *own == c) acc += fc * (wsing + regular * vol);
      else acc += fc * vol * green<D>(k, points[p], g.point(c));
    }
    out[p] = -acc;
  }
  return out;
}

// ∇u(x) = -Σ_c ∇_x Φ(x, y_c) f(y_c) h^D for x outside supp f.
template <int D>
std::vector<std::array<cplx, D>> solve_grad_u(const FieldRealization<D>& f, double k,
                                              const std::vector<Point<D>>& points) {
  const Grid<D>& g = f.grid;
  const double vol = g.cell_volume();
  std::vector<std::array<cplx, D>> out(points.size());
  for (std::size_t p = 0; p < points.size(); ++p) {
    std::array<cplx, D> acc{};
    for (std::size_t c = 0; c < f.values.size(); ++c) {
      const double fc = f.values[c];
      if (fc == 0.0) continue;
      const auto gr = green_gradient<D>(k, points[p], g.point(c));
      for (int a = 0; a < D; ++a) acc[a] -= fc * vol * gr[a];
    }
    out[p] = acc;
  }
  return out;
}

template <int D>
void check_surface_clearance(const Grid<D>& grid, double support_radius, double R) {
  if (R - support_radius < 2.0 * grid.spacing())
    throw GeometryError("measurement surface must stay two cells clear of the source support");
}

// Maps source values on a fixed cell list to (u, ∂_ν u) on a surface grid.
template <int D>
class BoundaryOperator {
 public:
  BoundaryOperator(const std::vector<Point<D>>& sources, double cell_volume, const SurfaceGrid<D>& surface,
                   double k)
      : k_(k), u_(surface.size(), sources.size()), dnu_(surface.size(), sources.size()) {
    for (std::size_t c = 0; c < sources.size(); ++c) {
      for (std::size_t i = 0; i < surface.size(); ++i) {
        const Point<D> z = surface.nodes[i] - sources[c];
        const double r = norm(z);
        u_(i, c) = -cell_volume * green_radial<D>(k, r);
        dnu_(i, c) = -cell_volume * green_radial_derivative<D>(k, r) * (dot(surface.normals[i], z) / r);
      }
    }
  }

  double wavenumber() const { return k_; }
  const Eigen::MatrixXcd& u_matrix() const { return u_; }
  const Eigen::MatrixXcd& dnu_matrix() const { return dnu_; }

  // Columns of f are realizations.
  void apply(const Eigen::MatrixXd& f, Eigen::MatrixXcd& u, Eigen::MatrixXcd& dnu) const {
    u.noalias() = u_ * f;
    dnu.noalias() = dnu_ * f;
  }

 private:
  double k_;
  Eigen::MatrixXcd u_;
  Eigen::MatrixXcd dnu_;
};

template <int D>
struct BoundaryValues {
  std::vector<cplx> u;
  std::vector<cplx> dnu;
};

template <int D>
BoundaryValues<D> boundary_data(const FieldRealization<D>& f, double k, const SurfaceGrid<D>& surface) {
  check_surface_clearance<D>(f.grid, detail::support_radius<D>(f), surface.radius);
  std::vector<Point<D>> pts;
  std::vector<double> vals;
  for (std::size_t c = 0; c < f.values.size(); ++c) {
    if (f.values[c] == 0.0) continue;
    pts.push_back(f.grid.point(c));
    vals.push_back(f.values[c]);
  }
  BoundaryValues<D> out{std::vector<cplx>(surface.size(), 0.0), std::vector<cplx>(surface.size(), 0.0)};
  if (pts.empty()) return out;
  BoundaryOperator<D> op(pts, f.grid.cell_volume(), surface, k);
  Eigen::MatrixXd fv = Eigen::Map<const Eigen::VectorXd>(vals.data(), vals.size());
  Eigen::MatrixXcd u, dnu;
  op.apply(fv, u, dnu);
  for (std::size_t i = 0; i < surface.size(); ++i) {
    out.u[i] = u(i, 0);
    out.dnu[i] = dnu(i, 0);
  }
  return out;
}

// Far-field constant C_d: 1/(4π) in 3D, e^{iπ/4}/√(8π) in 2D.
template <int D>
cplx far_constant() {
  using std::numbers::pi;
  if constexpr (D == 3) return 1.0 / (4.0 * pi);
  else return std::polar(1.0 / std::sqrt(8.0 * pi), 0.25 * pi);
}

template <int D>
void check_unit(const Point<D>& d) {
  if (std::abs(norm(d) - 1.0) > 1e-12) throw NormalizationError("direction is not a unit vector");
}

// Maps source values on a fixed cell list to u^∞ over a list of directions.
template <int D>
class FarFieldOperator {
 public:
  FarFieldOperator(const std::vector<Point<D>>& sources, double cell_volume, const std::vector<Point<D>>& directions,
                   double k)
      : k_(k), e_(directions.size(), sources.size()) {
    const double ka = std::abs(k);
    if (!(ka > 0.0)) throw DomainError("wavenumber must be nonzero");
    for (const auto& d : directions) check_unit<D>(d);
    const cplx pref = -far_constant<D>() * std::pow(ka, 0.5 * (D - 3)) * cell_volume;
    for (std::size_t c = 0; c < sources.size(); ++c)
      for (std::size_t l = 0; l < directions.size(); ++l)
        e_(l, c) = pref * std::polar(1.0, -ka * dot(directions[l], sources[c]));
    if (k < 0.0) e_ = e_.conjugate().eval();
  }

  double wavenumber() const { return k_; }
  const Eigen::MatrixXcd& matrix() const { return e_; }

  void apply(const Eigen::MatrixXd& f, Eigen::MatrixXcd& out) const { out.noalias() = e_ * f; }

 private:
  double k_;
  Eigen::MatrixXcd e_;
};

template <int D>
std::vector<cplx> far_field(const FieldRealization<D>& f, double k, const std::vector<Point<D>>& directions) {
  for (const auto& d : directions) check_unit<D>(d);
  std::vector<Point<D>> pts;
  std::vector<double> vals;
  for (std::size_t c = 0; c < f.values.size(); ++c) {
    if (f.values[c] == 0.0) continue;
    pts.push_back(f.grid.point(c));
    vals.push_back(f.values[c]);
  }
  std::vector<cplx> out(directions.size(), 0.0);
  if (pts.empty()) return out;
  FarFieldOperator<D> op(pts, f.grid.cell_volume(), directions, k);
  Eigen::MatrixXd fv = Eigen::Map<const Eigen::VectorXd>(vals.data(), vals.size());
  Eigen::MatrixXcd r;
  op.apply(fv, r);
  for (std::size_t l = 0; l < directions.size(); ++l) out[l] = r(l, 0);
  return out;
}

// Stencil order: x, x+hs e_1, x-hs e_1, x+hs e_2, ...
template <int D>
std::vector<Point<D>> stencil_points(const Point<D>& x, double hs) {
  std::vector<Point<D>> pts{x};
  for (int a = 0; a < D; ++a) {
    Point<D> p = x, m = x;
    p[a] += hs;
    m[a] -= hs;
    pts.push_back(p);
    pts.push_back(m);
  }
  return pts;
}

// |Δ_h u + k²u - f(x)| from values on stencil_points(x, hs).
template <int D>
double pde_residual(const std::vector<cplx>& stencil, double hs, double k, double fx) {
  if (stencil.size() != 2 * D + 1) throw ConsistencyError("stencil must hold 2d+1 values");
  cplx lap = 0.0;
  for (int a = 0; a < D; ++a) lap += stencil[1 + 2 * a] + stencil[2 + 2 * a] - 2.0 * stencil[0];
  return std::abs(lap / (hs * hs) + k * k * stencil[0] - fx);
}

// r^{(d-1)/2} |∂_r u - iku| at x, from the gradient representation.
template <int D>
double radiation_residual(const FieldRealization<D>& f, double k, const Point<D>& x) {
  const double r = norm(x);
  const cplx u = solve_u<D>(f, k, {x})[0];
  const auto grad = solve_grad_u<D>(f, k, {x})[0];
  cplx ur = 0.0;
  for (int a = 0; a < D; ++a) ur += grad[a] * (x[a] / r);
  return std::pow(r, 0.5 * (D - 1)) * std::abs(ur - cplx(0.0, k) * u);
}

}  // namespace sthm
