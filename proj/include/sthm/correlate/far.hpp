#pragma once

#include <vector>

#include "sthm/correlate/stats.hpp"
#include "sthm/forward/datasets.hpp"

namespace sthm {

template <int D>
struct FarCorrRecord {
  double k = 0.0;
  double eta = 0.0;
  Point<D> xhat{};
  cplx corr = 0.0;
  double std_error = 0.0;
  std::size_t N = 0;
  double m = 0.0;
  double cd_abs2 = 0.0;

  double tau() const { return eta * k; }

  // Scale that maps corr to an estimate of ĥ(τ x̂).
  double scale() const {
    const double p = 0.5 * (D - 3);
    return std::pow(k, m) / (cd_abs2 * std::pow(k + tau(), p) * std::pow(k, p));
  }
  cplx normalized() const { return scale() * corr; }
  double normalized_std_error() const { return scale() * std_error; }
  double epsilon_tilde2() const { return std::norm(std::pow(k, m + 3.0 - D) * corr); }
};

namespace detail {

inline void check_eta(double eta) {
  if (!(eta > 0.0 && eta < 1.0)) throw DomainError("relative offset eta must lie in (0,1)");
}

}  // namespace detail

namespace detail {

// value(r, j, l) returns u^∞ at wavenumber slot j (0 is k, j ≥ 1 is (1+η_j)k) for direction l.
template <int D, typename Value>
std::vector<FarCorrRecord<D>> far_records_from(double k, const std::vector<double>& etas,
                                               const std::vector<Point<D>>& directions, std::size_t n, double m,
                                               int workers, Value&& value) {
  if (n < 2) throw ConsistencyError("correlation estimates need at least 2 realizations");
  const std::size_t nb = block_count(n);
  const std::size_t nd = directions.size();
  const double cd2 = std::norm(far_constant<D>());
  std::vector<FarCorrRecord<D>> out;
  out.reserve(etas.size() * nd);
  for (std::size_t j = 0; j < etas.size(); ++j) {
    std::vector<std::vector<ComplexStats>> blocks(nb, std::vector<ComplexStats>(nd));
    for_each_block(nb, workers, [&](std::size_t b) {
      const std::size_t c0 = b * kRealizationBlock;
      const std::size_t nc = std::min(kRealizationBlock, n - c0);
      for (std::size_t r = c0; r < c0 + nc; ++r)
        for (std::size_t l = 0; l < nd; ++l) blocks[b][l].add(value(r, j + 1, l) * std::conj(value(r, 0, l)));
    });
    for (std::size_t l = 0; l < nd; ++l) {
      ComplexStats st;
      for (std::size_t b = 0; b < nb; ++b) st.merge(blocks[b][l]);
      out.push_back(FarCorrRecord<D>{k, etas[j], directions[l], st.mean, st.std_error(), n, m, cd2});
    }
  }
  return out;
}

}  // namespace detail

// Records for every (η_j, x̂_l) from stored far-field data holding k and each (1+η_j)k.
template <int D>
std::vector<FarCorrRecord<D>> estimate_far_design(const FarFieldDataset<D>& ds, double k, const std::vector<double>& etas,
                                                  const std::vector<Point<D>>& directions, int workers = 1) {
  for (double eta : etas) detail::check_eta(eta);
  std::vector<std::size_t> slots{ds.k_index(k)};
  for (double eta : etas) slots.push_back(ds.k_index((1.0 + eta) * k));
  std::vector<std::size_t> dirs;
  for (const auto& x : directions) dirs.push_back(ds.direction_index(x));
  auto value = [&](std::size_t r, std::size_t j, std::size_t l) { return ds.values[ds.offset(r, slots[j]) + dirs[l]]; };
  return detail::far_records_from<D>(k, etas, directions, ds.count(), ds.m, workers, value);
}

// Ensemble mean of u^∞(x̂,(1+η)k)·conj(u^∞(x̂,k)).
template <int D>
FarCorrRecord<D> estimate_far(const FarFieldDataset<D>& ds, double k, double eta, const Point<D>& xhat) {
  return estimate_far_design<D>(ds, k, {eta}, {xhat})[0];
}

// Records for every (η_j, x̂_l) straight from a source ensemble; wavenumbers are k and (1+η_j)k.
template <int D>
std::vector<FarCorrRecord<D>> estimate_far_design(const SupportEnsemble<D>& e, double k, const std::vector<double>& etas,
                                                  const std::vector<Point<D>>& directions, int workers = 1) {
  for (double eta : etas) detail::check_eta(eta);
  const std::size_t n = e.size();
  const std::size_t nd = directions.size();
  std::vector<double> ks{k};
  for (double eta : etas) ks.push_back((1.0 + eta) * k);
  std::vector<Eigen::MatrixXcd> data(ks.size(), Eigen::MatrixXcd(nd, n));
  for (std::size_t j = 0; j < ks.size(); ++j) {
    const FarFieldOperator<D> op(e.support.points, e.support.cell_volume, directions, ks[j]);
    for_each_block(block_count(n), workers, [&](std::size_t b) {
      const std::size_t c0 = b * kRealizationBlock;
      const std::size_t nc = std::min(kRealizationBlock, n - c0);
      Eigen::MatrixXcd v;
      op.apply(e.values.middleCols(c0, nc), v);
      data[j].middleCols(c0, nc) = v;
    });
  }
  auto value = [&](std::size_t r, std::size_t j, std::size_t l) { return data[j](l, r); };
  return detail::far_records_from<D>(k, etas, directions, n, e.spec->m(), workers, value);
}

}  // namespace sthm
