#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <vector>

#include "sthm/forward/solve.hpp"
#include "sthm/numerics/parallel.hpp"
#include "sthm/randfield/strength.hpp"

namespace sthm {

inline constexpr std::size_t kRealizationBlock = 64;

inline std::size_t block_count(std::size_t n, std::size_t block = kRealizationBlock) {
  return (n + block - 1) / block;
}

// Ensemble stored as source values on the support cells of h (columns are realizations).
template <int D>
struct SupportEnsemble {
  std::shared_ptr<const SymbolSpec<D>> spec;
  Grid<D> grid;
  SourceSupport<D> support;
  Eigen::MatrixXd values;
  std::vector<std::uint64_t> seeds;

  std::size_t size() const { return static_cast<std::size_t>(values.cols()); }

  FieldRealization<D> realization(std::size_t r) const {
    FieldRealization<D> f{grid, std::vector<double>(grid.size(), 0.0), seeds[r], spec, 0.0};
    for (std::size_t c = 0; c < support.size(); ++c) f.values[support.cells[c]] = values(c, r);
    return f;
  }
};

template <int D>
SupportEnsemble<D> sample_support_ensemble(std::shared_ptr<const SymbolSpec<D>> spec, const Grid<D>& grid,
                                           std::uint64_t master, std::uint64_t stage, std::size_t count,
                                           int workers = 1) {
  SupportEnsemble<D> e{spec, grid, support_of<D>(spec->strength()), Eigen::MatrixXd(), {}};
  e.values.resize(e.support.size(), count);
  e.seeds.resize(count);
  for (std::size_t r = 0; r < count; ++r) e.seeds[r] = derive_seed(master, stage, r);
  const Sampler<D> sampler(spec, grid);
  for_each_block(block_count(count, 8), workers, [&](std::size_t b) {
    for (std::size_t r = 8 * b; r < std::min(count, 8 * b + 8); ++r) {
      const auto f = sampler.sample(e.seeds[r]);
      for (std::size_t c = 0; c < e.support.size(); ++c) e.values(c, r) = f.values[e.support.cells[c]];
    }
  });
  return e;
}

namespace detail {

inline std::size_t find_wavenumber(const std::vector<double>& ks, double k) {
  for (std::size_t j = 0; j < ks.size(); ++j)
    if (std::abs(ks[j] - std::abs(k)) <= 1e-9 * std::abs(k)) return j;
  throw LookupError("wavenumber " + std::to_string(k) + " not present in dataset");
}

}  // namespace detail

// u and ∂_ν u per (realization, wavenumber, node).
template <int D>
struct BoundaryDataset {
  std::shared_ptr<const SurfaceGrid<D>> surface;
  std::vector<double> ks;
  std::vector<std::uint64_t> seeds;
  std::vector<cplx> u;
  std::vector<cplx> dnu;

  std::size_t count() const { return seeds.size(); }
  std::size_t nodes() const { return surface->size(); }
  std::size_t k_index(double k) const { return detail::find_wavenumber(ks, k); }
  std::size_t offset(std::size_t r, std::size_t j) const { return (r * ks.size() + j) * nodes(); }

  // Negative k returns the conjugate data.
  cplx u_at(std::size_t r, double k, std::size_t i) const {
    const cplx v = u[offset(r, k_index(k)) + i];
    return k < 0.0 ? std::conj(v) : v;
  }
  cplx dnu_at(std::size_t r, double k, std::size_t i) const {
    const cplx v = dnu[offset(r, k_index(k)) + i];
    return k < 0.0 ? std::conj(v) : v;
  }
};

template <int D>
BoundaryDataset<D> make_boundary_dataset(const SupportEnsemble<D>& e, std::shared_ptr<const SurfaceGrid<D>> surface,
                                         const std::vector<double>& ks, int workers = 1) {
  check_surface_clearance<D>(e.grid, e.spec->strength().r0, surface->radius);
  const std::size_t n = e.size();
  const std::size_t nodes = surface->size();
  BoundaryDataset<D> ds{surface, ks, e.seeds, std::vector<cplx>(n * ks.size() * nodes),
                        std::vector<cplx>(n * ks.size() * nodes)};
  for (std::size_t j = 0; j < ks.size(); ++j) {
    const BoundaryOperator<D> op(e.support.points, e.support.cell_volume, *surface, ks[j]);
    for_each_block(block_count(n), workers, [&](std::size_t b) {
      const std::size_t c0 = b * kRealizationBlock;
      const std::size_t nc = std::min(kRealizationBlock, n - c0);
      Eigen::MatrixXcd u, dnu;
      op.apply(e.values.middleCols(c0, nc), u, dnu);
      for (std::size_t r = 0; r < nc; ++r) {
        for (std::size_t i = 0; i < nodes; ++i) {
          ds.u[ds.offset(c0 + r, j) + i] = u(i, r);
          ds.dnu[ds.offset(c0 + r, j) + i] = dnu(i, r);
        }
      }
    });
  }
  return ds;
}

// u^∞ per (realization, wavenumber, direction).
template <int D>
struct FarFieldDataset {
  std::vector<Point<D>> directions;
  std::vector<double> ks;
  std::vector<std::uint64_t> seeds;
  cplx cd;
  double m;
  std::vector<cplx> values;

  std::size_t count() const { return seeds.size(); }
  std::size_t k_index(double k) const { return detail::find_wavenumber(ks, k); }
  std::size_t offset(std::size_t r, std::size_t j) const { return (r * ks.size() + j) * directions.size(); }

  std::size_t direction_index(const Point<D>& x) const {
    for (std::size_t l = 0; l < directions.size(); ++l)
      if (norm(directions[l] - x) <= 1e-12) return l;
    throw LookupError("direction not present in far-field dataset");
  }

  cplx at(std::size_t r, double k, std::size_t l) const {
    const cplx v = values[offset(r, k_index(k)) + l];
    return k < 0.0 ? std::conj(v) : v;
  }
};

template <int D>
FarFieldDataset<D> make_farfield_dataset(const SupportEnsemble<D>& e, const std::vector<Point<D>>& directions,
                                         const std::vector<double>& ks, int workers = 1) {
  const std::size_t n = e.size();
  const std::size_t nd = directions.size();
  FarFieldDataset<D> ds{directions, ks, e.seeds, far_constant<D>(), e.spec->m(), std::vector<cplx>(n * ks.size() * nd)};
  for (std::size_t j = 0; j < ks.size(); ++j) {
    const FarFieldOperator<D> op(e.support.points, e.support.cell_volume, directions, ks[j]);
    for_each_block(block_count(n), workers, [&](std::size_t b) {
      const std::size_t c0 = b * kRealizationBlock;
      const std::size_t nc = std::min(kRealizationBlock, n - c0);
      Eigen::MatrixXcd v;
      op.apply(e.values.middleCols(c0, nc), v);
      for (std::size_t r = 0; r < nc; ++r)
        for (std::size_t l = 0; l < nd; ++l) ds.values[ds.offset(c0 + r, j) + l] = v(l, r);
    });
  }
  return ds;
}

}  // namespace sthm
