#pragma once

#include <cmath>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "sthm/correlate/far.hpp"
#include "sthm/correlate/near.hpp"
#include "sthm/numerics/fft.hpp"
#include "sthm/recon/design.hpp"

namespace sthm {

enum class DataMode { near, far };

inline const char* mode_name(DataMode m) { return m == DataMode::near ? "near" : "far"; }

template <int D>
struct SpectrumEstimate {
  XiGrid<D> xi;
  std::vector<cplx> values;
  std::vector<double> std_error;
  std::vector<char> present;
  DataMode mode = DataMode::near;
  double K = 0.0;
  std::size_t N = 0;

  const Grid<D>& grid() const { return xi.grid; }
  double spacing() const { return xi.spacing(); }
  double extent() const { return xi.extent; }

  double hermitian_defect() const {
    double worst = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!present[i]) continue;
      const std::size_t p = grid().partner(i);
      worst = std::max(worst, std::abs(values[i] - std::conj(values[p])));
    }
    return worst;
  }
};

template <int D>
SpectrumEstimate<D> empty_spectrum(const XiGrid<D>& xi, DataMode mode, double K, std::size_t N) {
  const std::size_t n = xi.grid.size();
  return {xi, std::vector<cplx>(n, 0.0), std::vector<double>(n, 0.0), std::vector<char>(n, 0), mode, K, N};
}

// ĥ(ξ) ← (ĥ(ξ) + conj ĥ(−ξ))/2 on present cells whose partner is present.
template <int D>
void symmetrize(SpectrumEstimate<D>& s) {
  const auto& g = s.grid();
  auto v = s.values;
  auto e = s.std_error;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!s.present[i]) continue;
    const std::size_t p = g.partner(i);
    if (!s.present[p]) {
      s.present[i] = 0;
      v[i] = 0.0;
      e[i] = 0.0;
      continue;
    }
    v[i] = 0.5 * (s.values[i] + std::conj(s.values[p]));
    e[i] = 0.5 * (s.std_error[i] + s.std_error[p]);
  }
  s.values = std::move(v);
  s.std_error = std::move(e);
}

// Direction pairs for every lattice ξ in the disc; ξ = 0 uses the antipodal pair.
template <int D>
struct NearDesign {
  std::vector<Point<D>> directions;
  std::vector<DirectionPairIndex> pairs;
  std::vector<std::size_t> cells;
};

template <int D>
NearDesign<D> make_near_design(const XiGrid<D>& xi, double K) {
  NearDesign<D> d;
  for (std::size_t i = 0; i < xi.grid.size(); ++i) {
    if (!xi.inside(i)) continue;
    const auto [t1, t2] = direction_pair<D>(xi.grid.frequency(i), K);
    d.pairs.push_back({d.directions.size(), d.directions.size() + 1});
    d.directions.push_back(t1);
    d.directions.push_back(t2);
    d.cells.push_back(i);
  }
  return d;
}

namespace detail {

inline long long quantize(double v) { return std::llround(v * 1e9); }

template <int D>
std::vector<long long> direction_key(const Point<D>& t) {
  std::vector<long long> k;
  for (int a = 0; a < D; ++a) k.push_back(quantize(t[a]));
  return k;
}

template <int D>
std::string format_direction(const Point<D>& t) {
  std::string s = "(";
  for (int a = 0; a < D; ++a) s += (a ? "," : "") + std::to_string(t[a]);
  return s + ")";
}

}  // namespace detail

// ĥ(ξ) ← K^m Σ_j I_j(K, θ₁(ξ), θ₂(ξ)) on the disc |ξ| ≤ extent.
template <int D>
SpectrumEstimate<D> hhat_near(const std::vector<NearCorrRecord<D>>& records, const XiGrid<D>& xi, double K, double m) {
  if (xi.extent > 2.0 * K * (1.0 + 1e-12)) throw DomainError("near-field extent exceeds 2K");
  std::map<std::vector<long long>, const NearCorrRecord<D>*> index;
  std::size_t N = 0;
  for (const auto& r : records) {
    if (std::abs(r.k - K) > 1e-9 * K) continue;
    auto key = detail::direction_key<D>(r.theta1);
    const auto k2 = detail::direction_key<D>(r.theta2);
    key.insert(key.end(), k2.begin(), k2.end());
    index[key] = &r;
    N = N ? std::min(N, r.N) : r.N;
  }
  const auto design = make_near_design<D>(xi, K);
  auto s = empty_spectrum<D>(xi, DataMode::near, K, N);
  const double scale = std::pow(K, m);
  std::string missing;
  std::size_t nmissing = 0;
  for (std::size_t p = 0; p < design.cells.size(); ++p) {
    const auto& t1 = design.directions[design.pairs[p].first];
    const auto& t2 = design.directions[design.pairs[p].second];
    auto key = detail::direction_key<D>(t1);
    const auto k2 = detail::direction_key<D>(t2);
    key.insert(key.end(), k2.begin(), k2.end());
    const auto it = index.find(key);
    if (it == index.end()) {
      if (nmissing++ < 8) missing += " " + detail::format_direction<D>(t1) + "/" + detail::format_direction<D>(t2);
      continue;
    }
    const std::size_t c = design.cells[p];
    s.values[c] = scale * it->second->sum();
    s.std_error[c] = scale * it->second->sum_std_error;
    s.present[c] = 1;
  }
  if (nmissing)
    throw CoverageError("missing " + std::to_string(nmissing) + " direction pairs:" + missing + (nmissing > 8 ? " ..." : ""));
  symmetrize(s);
  return s;
}

namespace detail {

// Bracketing index and weight for x in a sorted sequence, clamped at the ends.
inline std::pair<std::size_t, double> bracket(const std::vector<double>& xs, double x) {
  if (xs.size() == 1) return {0, 0.0};
  const bool up = xs.back() > xs.front();
  std::size_t j = 0;
  while (j + 2 < xs.size() && (up ? xs[j + 1] < x : xs[j + 1] > x)) ++j;
  const double t = (x - xs[j]) / (xs[j + 1] - xs[j]);
  return {j, std::clamp(t, 0.0, 1.0)};
}

struct Weighted {
  std::size_t index;
  double weight;
};

// Interpolation weights over the design directions for a unit direction.
template <int D>
std::vector<Weighted> angular_weights(const PolarDesign<D>& p, const Point<D>& u) {
  const double two_pi = 2.0 * std::numbers::pi;
  const int na = p.n_azimuth;
  double phi = std::atan2(u[1], u[0]);
  if (phi < 0.0) phi += two_pi;
  const double a = phi / (two_pi / na);
  const int b0 = static_cast<int>(std::floor(a)) % na;
  const int b1 = (b0 + 1) % na;
  const double t = a - std::floor(a);
  if constexpr (D == 2) {
    return {{static_cast<std::size_t>(b0), 1.0 - t}, {static_cast<std::size_t>(b1), t}};
  } else {
    const auto [l, s] = bracket(p.polar_angles, std::acos(std::clamp(u[2], -1.0, 1.0)));
    const std::size_t r0 = l * na, r1 = (l + 1) * na;
    return {{r0 + b0, (1.0 - s) * (1.0 - t)}, {r0 + b1, (1.0 - s) * t}, {r1 + b0, s * (1.0 - t)}, {r1 + b1, s * t}};
  }
}

}  // namespace detail

// Polar samples ĥ(τ_j x̂_l) from normalized far correlations, resampled onto the ξ-lattice.
template <int D>
SpectrumEstimate<D> hhat_far(const std::vector<FarCorrRecord<D>>& records, const PolarDesign<D>& design,
                             const XiGrid<D>& xi, double K) {
  if (xi.extent > K * (1.0 + 1e-12)) throw DomainError("far-field extent exceeds K");
  const double dxi = xi.spacing();
  const auto& radii = design.radii;
  double radial = radii.front();
  for (std::size_t j = 1; j < radii.size(); ++j) radial = std::max(radial, radii[j] - radii[j - 1]);
  const double arc = radii.back() * 2.0 * std::numbers::pi / design.n_azimuth;
  if (radial > 4.0 * dxi || arc > 4.0 * dxi) throw DesignError("polar design is too sparse for the frequency lattice");
  if (radii.back() < xi.extent * (1.0 - 1e-9)) throw CoverageError("polar design does not reach the spectrum extent");

  std::map<std::vector<long long>, const FarCorrRecord<D>*> index;
  std::size_t N = 0;
  for (const auto& r : records) {
    if (std::abs(r.k - K) > 1e-9 * K) continue;
    auto key = detail::direction_key<D>(r.xhat);
    key.push_back(detail::quantize(r.tau()));
    index[key] = &r;
    N = N ? std::min(N, r.N) : r.N;
  }
  const std::size_t nt = radii.size(), nd = design.directions.size();
  std::vector<cplx> val(nt * nd);
  std::vector<double> err(nt * nd);
  std::size_t nmissing = 0;
  std::string missing;
  for (std::size_t j = 0; j < nt; ++j)
    for (std::size_t l = 0; l < nd; ++l) {
      auto key = detail::direction_key<D>(design.directions[l]);
      key.push_back(detail::quantize(radii[j]));
      const auto it = index.find(key);
      if (it == index.end()) {
        if (nmissing++ < 8) missing += " tau=" + std::to_string(radii[j]) + detail::format_direction<D>(design.directions[l]);
        continue;
      }
      val[j * nd + l] = it->second->normalized();
      err[j * nd + l] = it->second->normalized_std_error();
    }
  if (nmissing)
    throw CoverageError("missing " + std::to_string(nmissing) + " far-field samples:" + missing + (nmissing > 8 ? " ..." : ""));

  auto at_radius = [&](std::size_t j, const std::vector<detail::Weighted>& w, double& se) {
    cplx v = 0.0;
    se = 0.0;
    for (const auto& x : w) {
      v += x.weight * val[j * nd + x.index];
      se += x.weight * err[j * nd + x.index];
    }
    return v;
  };
  auto sample = [&](double r, const std::vector<detail::Weighted>& w, double& se) {
    std::size_t j;
    double t;
    if (r <= radii[0]) {
      j = 0;
      t = (r - radii[0]) / (radii[1] - radii[0]);
    } else {
      const auto b = detail::bracket(radii, r);
      j = b.first;
      t = b.second;
    }
    double s0, s1;
    const cplx v0 = at_radius(j, w, s0);
    const cplx v1 = at_radius(j + 1, w, s1);
    se = std::abs(1.0 - t) * s0 + std::abs(t) * s1;
    return (1.0 - t) * v0 + t * v1;
  };

  auto s = empty_spectrum<D>(xi, DataMode::far, K, N);
  for (std::size_t i = 0; i < xi.grid.size(); ++i) {
    if (!xi.inside(i)) continue;
    const Point<D> f = xi.grid.frequency(i);
    const double r = norm(f);
    if (r == 0.0) {
      cplx acc = 0.0;
      double se = 0.0;
      for (std::size_t l = 0; l < nd; ++l) {
        double e;
        acc += sample(0.0, {{l, 1.0}}, e);
        se += e;
      }
      s.values[i] = acc / static_cast<double>(nd);
      s.std_error[i] = se / static_cast<double>(nd);
    } else {
      double se;
      s.values[i] = sample(r, detail::angular_weights<D>(design, (1.0 / r) * f), se);
      s.std_error[i] = se;
    }
    s.present[i] = 1;
  }
  symmetrize(s);
  return s;
}

// Grid-sum transform of the true strength on the occupied lattice cells.
template <int D>
SpectrumEstimate<D> true_spectrum(const StrengthField<D>& h, const XiGrid<D>& xi, DataMode mode = DataMode::near) {
  auto s = empty_spectrum<D>(xi, mode, 0.0, 0);
  if (xi.grid == h.grid && xi.q == 1) {
    // The dual lattice of h's own grid: one forward transform gives the same sums.
    const auto all = fft_field<D>(h.grid, std::vector<cplx>(h.values.begin(), h.values.end()), FftDirection::forward);
    for (std::size_t i = 0; i < xi.grid.size(); ++i) {
      if (!xi.inside(i)) continue;
      s.values[i] = all[i];
      s.present[i] = 1;
    }
    symmetrize(s);
    return s;
  }
  for (std::size_t i = 0; i < xi.grid.size(); ++i) {
    if (!xi.inside(i)) continue;
    s.values[i] = h.transform(xi.grid.frequency(i));
    s.present[i] = 1;
  }
  symmetrize(s);
  return s;
}

}  // namespace sthm
