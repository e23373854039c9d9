#pragma once

#include <vector>

#include "sthm/correlate/stats.hpp"
#include "sthm/forward/datasets.hpp"

namespace sthm {

struct ComplexEstimate {
  cplx mean = 0.0;
  double std_error = 0.0;
};

template <int D>
cplx source_transform(const FieldRealization<D>& f, const Point<D>& xi) {
  cplx acc = 0.0;
  for (std::size_t c = 0; c < f.values.size(); ++c)
    if (f.values[c] != 0.0) acc += f.values[c] * std::polar(1.0, -dot(xi, f.grid.point(c)));
  return acc * f.grid.cell_volume();
}

// Ensemble mean of f̂(kθ₁)·f̂(kθ₂) by direct grid sums.
template <int D>
ComplexEstimate estimate_fhat_corr(const std::vector<FieldRealization<D>>& realizations, double k, const Point<D>& theta1,
                                   const Point<D>& theta2) {
  if (realizations.size() < 2) throw ConsistencyError("correlation estimates need at least 2 realizations");
  const auto& first = realizations.front();
  for (const auto& r : realizations)
    if (!(r.grid == first.grid) || !r.spec || !first.spec || !(*r.spec == *first.spec))
      throw ConsistencyError("realizations do not share one spec and grid");
  ComplexStats st;
  for (const auto& f : realizations) st.add(source_transform<D>(f, k * theta1) * source_transform<D>(f, k * theta2));
  return {st.mean, st.std_error()};
}

// Same estimate over a support ensemble, one value per direction pair.
template <int D>
std::vector<ComplexEstimate> estimate_fhat_corr(const SupportEnsemble<D>& e, double k,
                                                const std::vector<std::pair<Point<D>, Point<D>>>& pairs) {
  if (e.size() < 2) throw ConsistencyError("correlation estimates need at least 2 realizations");
  const std::size_t S = e.support.size();
  Eigen::MatrixXcd w(2 * pairs.size(), S);
  for (std::size_t p = 0; p < pairs.size(); ++p)
    for (std::size_t c = 0; c < S; ++c) {
      w(2 * p, c) = e.support.cell_volume * std::polar(1.0, -k * dot(pairs[p].first, e.support.points[c]));
      w(2 * p + 1, c) = e.support.cell_volume * std::polar(1.0, -k * dot(pairs[p].second, e.support.points[c]));
    }
  const Eigen::MatrixXcd t = w * e.values;
  std::vector<ComplexEstimate> out;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    ComplexStats st;
    for (Eigen::Index r = 0; r < t.cols(); ++r) st.add(t(2 * p, r) * t(2 * p + 1, r));
    out.push_back({st.mean, st.std_error()});
  }
  return out;
}

}  // namespace sthm
