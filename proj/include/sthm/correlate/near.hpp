#pragma once

#include <Eigen/Dense>

#include <array>
#include <functional>
#include <vector>

#include "sthm/correlate/stats.hpp"
#include "sthm/forward/datasets.hpp"

namespace sthm {

template <int D>
struct NearCorrRecord {
  double k = 0.0;
  Point<D> theta1{};
  Point<D> theta2{};
  std::array<cplx, 4> I{};
  std::array<double, 4> std_error{};
  double sum_std_error = 0.0;
  std::size_t N = 0;

  cplx sum() const { return I[0] + I[1] + I[2] + I[3]; }
  double epsilon2() const { return std::norm(I[0]) + std::norm(I[1]) + std::norm(I[2]) + std::norm(I[3]); }
};

// Plane-wave moments on the surface: A(θ) = Σ w ∂_ν u e^{-ikθ·x}, B(θ) = Σ w u e^{-ikθ·x}(-ikθ·ν).
template <int D>
class NearFunctional {
 public:
  NearFunctional(const SurfaceGrid<D>& s, double k, const std::vector<Point<D>>& directions)
      : k_(k), wa_(directions.size(), s.size()), wb_(directions.size(), s.size()) {
    for (const auto& t : directions) check_unit<D>(t);
    for (std::size_t i = 0; i < s.size(); ++i) {
      for (std::size_t l = 0; l < directions.size(); ++l) {
        const cplx e = s.weights[i] * std::polar(1.0, -k * dot(directions[l], s.nodes[i]));
        wa_(l, i) = e;
        wb_(l, i) = e * cplx(0.0, -k * dot(directions[l], s.normals[i]));
      }
    }
  }

  double wavenumber() const { return k_; }
  std::size_t directions() const { return static_cast<std::size_t>(wa_.rows()); }
  const Eigen::MatrixXcd& a_weights() const { return wa_; }
  const Eigen::MatrixXcd& b_weights() const { return wb_; }

  void apply(const Eigen::MatrixXcd& u, const Eigen::MatrixXcd& dnu, Eigen::MatrixXcd& A, Eigen::MatrixXcd& B) const {
    A.noalias() = wa_ * dnu;
    B.noalias() = wb_ * u;
  }

 private:
  double k_;
  Eigen::MatrixXcd wa_;
  Eigen::MatrixXcd wb_;
};

using DirectionPairIndex = std::pair<std::size_t, std::size_t>;

namespace detail {

// Per-pair statistics of I1..I4 and their sum for one block of realizations.
inline void accumulate_pairs(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& B,
                             const std::vector<DirectionPairIndex>& pairs, std::vector<std::array<ComplexStats, 5>>& out) {
  out.assign(pairs.size(), {});
  for (Eigen::Index r = 0; r < A.cols(); ++r) {
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      const auto [a, b] = pairs[p];
      const cplx a1 = A(a, r), a2 = A(b, r), b1 = B(a, r), b2 = B(b, r);
      const cplx i1 = a1 * a2, i2 = -(a1 * b2), i3 = -(b1 * a2), i4 = b1 * b2;
      auto& st = out[p];
      st[0].add(i1);
      st[1].add(i2);
      st[2].add(i3);
      st[3].add(i4);
      st[4].add(i1 + i2 + i3 + i4);
    }
  }
}

// fill(c0, nc, u, dnu) writes boundary data for realizations [c0, c0 + nc).
template <int D>
std::vector<NearCorrRecord<D>> near_records_from(
    const NearFunctional<D>& fn, const std::vector<Point<D>>& directions, const std::vector<DirectionPairIndex>& pairs,
    std::size_t count, int workers,
    const std::function<void(std::size_t, std::size_t, Eigen::MatrixXcd&, Eigen::MatrixXcd&)>& fill) {
  if (count < 2) throw ConsistencyError("correlation estimates need at least 2 realizations");
  const std::size_t nb = block_count(count);
  std::vector<std::vector<std::array<ComplexStats, 5>>> blocks(nb);
  for_each_block(nb, workers, [&](std::size_t b) {
    const std::size_t c0 = b * kRealizationBlock;
    const std::size_t nc = std::min(kRealizationBlock, count - c0);
    Eigen::MatrixXcd u, dnu, A, B;
    fill(c0, nc, u, dnu);
    fn.apply(u, dnu, A, B);
    accumulate_pairs(A, B, pairs, blocks[b]);
  });
  std::vector<NearCorrRecord<D>> out(pairs.size());
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    std::array<ComplexStats, 5> total{};
    for (std::size_t b = 0; b < nb; ++b)
      for (int j = 0; j < 5; ++j) total[j].merge(blocks[b][p][j]);
    auto& rec = out[p];
    rec.k = fn.wavenumber();
    rec.theta1 = directions[pairs[p].first];
    rec.theta2 = directions[pairs[p].second];
    for (int j = 0; j < 4; ++j) {
      rec.I[j] = total[j].mean;
      rec.std_error[j] = total[j].std_error();
    }
    rec.sum_std_error = total[4].std_error();
    rec.N = count;
  }
  return out;
}

}  // namespace detail

// Records for many direction pairs from stored boundary data at wavenumber k.
template <int D>
std::vector<NearCorrRecord<D>> estimate_near_design(const BoundaryDataset<D>& ds, double k,
                                                    const std::vector<Point<D>>& directions,
                                                    const std::vector<DirectionPairIndex>& pairs, int workers = 1) {
  if (!(k > 0.0)) throw DomainError("near-field correlations need a positive wavenumber");
  const std::size_t j = ds.k_index(k);
  const NearFunctional<D> fn(*ds.surface, ds.ks[j], directions);
  const std::size_t nodes = ds.nodes();
  auto fill = [&](std::size_t c0, std::size_t nc, Eigen::MatrixXcd& u, Eigen::MatrixXcd& dnu) {
    u.resize(nodes, nc);
    dnu.resize(nodes, nc);
    for (std::size_t r = 0; r < nc; ++r)
      for (std::size_t i = 0; i < nodes; ++i) {
        u(i, r) = ds.u[ds.offset(c0 + r, j) + i];
        dnu(i, r) = ds.dnu[ds.offset(c0 + r, j) + i];
      }
  };
  return detail::near_records_from<D>(fn, directions, pairs, ds.count(), workers, fill);
}

// Ensemble means of the four surface products for (θ1, θ2) at wavenumber k.
template <int D>
NearCorrRecord<D> estimate_near(const BoundaryDataset<D>& ds, double k, const Point<D>& theta1, const Point<D>& theta2,
                                int workers = 1) {
  return estimate_near_design<D>(ds, k, {theta1, theta2}, {{0, 1}}, workers)[0];
}

// Records for many direction pairs straight from a source ensemble, without storing boundary data.
template <int D>
std::vector<NearCorrRecord<D>> estimate_near_design(const SupportEnsemble<D>& e, const SurfaceGrid<D>& surface, double k,
                                                    const std::vector<Point<D>>& directions,
                                                    const std::vector<DirectionPairIndex>& pairs, int workers = 1) {
  check_surface_clearance<D>(e.grid, e.spec->strength().r0, surface.radius);
  const BoundaryOperator<D> op(e.support.points, e.support.cell_volume, surface, k);
  const NearFunctional<D> fn(surface, k, directions);
  auto fill = [&](std::size_t c0, std::size_t nc, Eigen::MatrixXcd& u, Eigen::MatrixXcd& dnu) {
    op.apply(e.values.middleCols(c0, nc), u, dnu);
  };
  return detail::near_records_from<D>(fn, directions, pairs, e.size(), workers, fill);
}

// |∫ f e^{-ikθ·x} - ∫_{∂B_R} (∂_ν u e^{-ikθ·x} - u ∂_ν e^{-ikθ·x})| / max(|volume side|, 1e-14).
template <int D>
double check_identity(const FieldRealization<D>& f, const BoundaryValues<D>& data, double k, const Point<D>& theta,
                      const SurfaceGrid<D>& surface) {
  cplx volume = 0.0;
  for (std::size_t c = 0; c < f.values.size(); ++c)
    if (f.values[c] != 0.0) volume += f.values[c] * std::polar(1.0, -k * dot(theta, f.grid.point(c)));
  volume *= f.grid.cell_volume();
  cplx surf = 0.0;
  for (std::size_t i = 0; i < surface.size(); ++i) {
    const cplx e = surface.weights[i] * std::polar(1.0, -k * dot(theta, surface.nodes[i]));
    surf += e * (data.dnu[i] - cplx(0.0, -k * dot(theta, surface.normals[i])) * data.u[i]);
  }
  return std::abs(volume - surf) / std::max(std::abs(volume), 1e-14);
}

template <int D>
double check_identity(const FieldRealization<D>& f, double k, const Point<D>& theta, const SurfaceGrid<D>& surface) {
  return check_identity<D>(f, boundary_data<D>(f, k, surface), k, theta, surface);
}

}  // namespace sthm
