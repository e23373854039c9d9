#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "sthm/correlate/far.hpp"
#include "sthm/correlate/near.hpp"
#include "sthm/recon/budget.hpp"
#include "sthm/recon/invert.hpp"
#include "sthm/recon/spectrum.hpp"

namespace sthm {

struct PipelineOptions {
  double R = 2.0;
  double r_domain = 1.5;
  int n_xi = 64;
  double rho_cut = 0.0;
  bool taper = true;
  std::vector<double> k_fractions{0.25, 0.5, 1.0};
  double far_density = 1.0;
  double margin = 1e-3;
  int workers = 1;
};

template <int D>
struct ModeOutcome {
  DataMode mode = DataMode::near;
  SpectrumEstimate<D> spectrum;
  ReconstructionResult<D> recon;
  StabilityBudget budget;
  double epsilon = 0.0;
  double epsilon_at_K = 0.0;
  std::vector<NearCorrRecord<D>> near_records;
  std::vector<FarCorrRecord<D>> far_records;
};

namespace detail {

template <typename F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageFailure&) {
    throw;
  } catch (const std::exception& e) {
    throw StageFailure(name, e.what());
  }
}

inline double truncation_radius(const PipelineOptions& o, const StabilityBudget& b, double extent) {
  if (o.rho_cut > 0.0) return o.rho_cut;
  return std::min(b.rho_cut(), extent);
}

}  // namespace detail

template <int D>
XiGrid<D> xi_grid_for(const Grid<D>& grid, DataMode mode, double K, const PipelineOptions& o) {
  const double rho = (mode == DataMode::near ? 2.0 * K : K) * (1.0 - o.margin);
  return make_xi_grid<D>(grid.side(), rho, o.n_xi, o.r_domain);
}

inline void check_fractions(const PipelineOptions& o) {
  if (std::find(o.k_fractions.begin(), o.k_fractions.end(), 1.0) == o.k_fractions.end())
    throw DomainError("design wavenumber fractions must include 1");
}

// Direction pairs at the design wavenumber k, over the lattice ξ with |ξ| < 2k.
template <int D>
NearDesign<D> near_slice_design(const XiGrid<D>& xi, double k, const PipelineOptions& o) {
  XiGrid<D> slice = xi;
  slice.extent = std::min(xi.extent, 2.0 * k * (1.0 - o.margin));
  return make_near_design<D>(slice, k);
}

template <int D>
std::vector<NearCorrRecord<D>> near_design_records(const SupportEnsemble<D>& e, const XiGrid<D>& xi, double k,
                                                   const PipelineOptions& o) {
  const auto design = near_slice_design<D>(xi, k, o);
  const auto surface = make_surface_grid<D>(o.R, k);
  return estimate_near_design<D>(e, surface, k, design.directions, design.pairs, o.workers);
}

// Offsets η = τ/k for the radii of the polar design reachable at wavenumber k.
template <int D>
std::vector<double> far_slice_etas(const PolarDesign<D>& design, double k, const PipelineOptions& o) {
  std::vector<double> etas;
  for (double t : design.radii)
    if (t <= k * (1.0 - o.margin) * (1.0 + 1e-12)) etas.push_back(t / k);
  return etas;
}

template <int D>
PolarDesign<D> far_design_for(const XiGrid<D>& xi, double K, const PipelineOptions& o) {
  return make_polar_design<D>(K * (1.0 - o.margin), xi.spacing(), o.far_density);
}

template <int D>
std::vector<FarCorrRecord<D>> far_design_records(const SupportEnsemble<D>& e, const PolarDesign<D>& design, double k,
                                                 const PipelineOptions& o) {
  return estimate_far_design<D>(e, k, far_slice_etas<D>(design, k, o), design.directions, o.workers);
}

namespace detail {

template <int D>
ModeOutcome<D> finish(const SymbolSpec<D>& spec, DataMode mode, SpectrumEstimate<D> spectrum, double eps, double eps_k,
                      double K, const PipelineOptions& o, std::vector<NearCorrRecord<D>> near,
                      std::vector<FarCorrRecord<D>> far) {
  const auto& h = spec.strength();
  const auto budget = make_budget(K, h.s, h.Q, spec.M(), o.R, D, eps);
  auto recon = stage("invert", [&] {
    return invert_spectrum<D>(spectrum, truncation_radius(o, budget, spectrum.extent()), o.taper);
  });
  recon.l2_error = l2_error<D>(recon.field, sample_strength<D>(h, recon.field.grid), o.r_domain);
  return {mode, std::move(spectrum), std::move(recon), budget, eps, eps_k, std::move(near), std::move(far)};
}

// Slices are aligned with o.k_fractions.
template <typename Record, typename Eps>
std::vector<Record> fold_slices(std::vector<std::vector<Record>>& slices, const PipelineOptions& o, Eps&& eps2,
                                double& eps, double& eps_k) {
  if (slices.size() != o.k_fractions.size()) throw ConsistencyError("one record slice per design wavenumber expected");
  eps = eps_k = 0.0;
  std::vector<Record> top;
  for (std::size_t j = 0; j < slices.size(); ++j) {
    for (const auto& r : slices[j]) {
      eps = std::max(eps, std::sqrt(eps2(r)));
      if (o.k_fractions[j] == 1.0) eps_k = std::max(eps_k, std::sqrt(eps2(r)));
    }
    if (o.k_fractions[j] == 1.0) top = std::move(slices[j]);
  }
  return top;
}

}  // namespace detail

// Folds per-slice near records into ε, the spectrum at K and the reconstruction.
template <int D>
ModeOutcome<D> conclude_near(const SymbolSpec<D>& spec, const Grid<D>& grid, std::vector<std::vector<NearCorrRecord<D>>> slices,
                             double K, const PipelineOptions& o) {
  check_fractions(o);
  const auto xi = detail::stage("spectrum", [&] { return xi_grid_for<D>(grid, DataMode::near, K, o); });
  double eps = 0.0, eps_k = 0.0;
  auto records = detail::fold_slices(slices, o, [](const auto& r) { return r.epsilon2(); }, eps, eps_k);
  auto spectrum = detail::stage("spectrum", [&] { return hhat_near<D>(records, xi, K, spec.m()); });
  return detail::finish<D>(spec, DataMode::near, std::move(spectrum), eps, eps_k, K, o, std::move(records), {});
}

template <int D>
ModeOutcome<D> conclude_far(const SymbolSpec<D>& spec, const Grid<D>& grid, std::vector<std::vector<FarCorrRecord<D>>> slices,
                            double K, const PipelineOptions& o) {
  check_fractions(o);
  const auto xi = detail::stage("spectrum", [&] { return xi_grid_for<D>(grid, DataMode::far, K, o); });
  const auto design = far_design_for<D>(xi, K, o);
  double eps = 0.0, eps_k = 0.0;
  auto records = detail::fold_slices(slices, o, [](const auto& r) { return r.epsilon_tilde2(); }, eps, eps_k);
  auto spectrum = detail::stage("spectrum", [&] { return hhat_far<D>(records, design, xi, K); });
  return detail::finish<D>(spec, DataMode::far, std::move(spectrum), eps, eps_k, K, o, {}, std::move(records));
}

template <int D>
ModeOutcome<D> run_near(const SupportEnsemble<D>& e, double K, const PipelineOptions& o) {
  check_fractions(o);
  const auto xi = detail::stage("spectrum", [&] { return xi_grid_for<D>(e.grid, DataMode::near, K, o); });
  std::vector<std::vector<NearCorrRecord<D>>> slices;
  detail::stage("correlate", [&] {
    for (double f : o.k_fractions) slices.push_back(near_design_records<D>(e, xi, f * K, o));
    return 0;
  });
  return conclude_near<D>(*e.spec, e.grid, std::move(slices), K, o);
}

template <int D>
ModeOutcome<D> run_far(const SupportEnsemble<D>& e, double K, const PipelineOptions& o) {
  check_fractions(o);
  const auto xi = detail::stage("spectrum", [&] { return xi_grid_for<D>(e.grid, DataMode::far, K, o); });
  const auto design = far_design_for<D>(xi, K, o);
  std::vector<std::vector<FarCorrRecord<D>>> slices;
  detail::stage("correlate", [&] {
    for (double f : o.k_fractions) slices.push_back(far_design_records<D>(e, design, f * K, o));
    return 0;
  });
  return conclude_far<D>(*e.spec, e.grid, std::move(slices), K, o);
}

struct StudyRow {
  double K = 0.0;
  std::size_t N = 0;
  DataMode mode = DataMode::near;
  double epsilon = 0.0;
  double epsilon_at_K = 0.0;
  double E = 0.0;
  double l2_error = 0.0;
  double rho_cut = 0.0;
  bool taper = true;
  double seconds = 0.0;
};

template <int D>
struct StudyResult {
  std::vector<StudyRow> rows;
  std::vector<ModeOutcome<D>> outcomes;
  std::optional<double> slope_near;
  std::optional<double> slope_far;
};

// Least-squares slope of log y against log x.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("slope fit needs at least two points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= x.size();
  my /= x.size();
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
    sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
  }
  return sxy / sxx;
}

inline constexpr std::uint64_t kStudyStage = 0x5354'5544'0000'0000ull;

inline std::uint64_t study_stage(double K) { return kStudyStage + static_cast<std::uint64_t>(std::llround(K * 1000.0)); }

struct StudyPlan {
  std::vector<double> Ks;
  std::size_t N = 4096;
  bool near = true;
  bool far = false;
  std::uint64_t master_seed = 0;
};

// Sample, correlate, assemble, invert per K; realizations are shared by both modes at each K.
template <int D>
StudyResult<D> stability_study(std::shared_ptr<const SymbolSpec<D>> spec, const Grid<D>& grid, const StudyPlan& plan,
                               const PipelineOptions& o, bool keep_outcomes = false) {
  if (plan.Ks.empty()) throw DomainError("study needs at least one frequency cap");
  for (std::size_t i = 1; i < plan.Ks.size(); ++i)
    if (!(plan.Ks[i] > plan.Ks[i - 1])) throw DomainError("frequency caps must be strictly increasing");
  if (!plan.near && !plan.far) throw DomainError("study needs at least one data mode");
  StudyResult<D> res;
  std::vector<double> kn, en, kf, ef;
  for (double K : plan.Ks) {
    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();
    const auto e = detail::stage("sample", [&] {
      return sample_support_ensemble<D>(spec, grid, plan.master_seed, study_stage(K), plan.N, o.workers);
    });
    const double t_sample = std::chrono::duration<double>(clock::now() - t0).count();
    for (DataMode mode : {DataMode::near, DataMode::far}) {
      if ((mode == DataMode::near && !plan.near) || (mode == DataMode::far && !plan.far)) continue;
      const auto t1 = clock::now();
      auto out = mode == DataMode::near ? run_near<D>(e, K, o) : run_far<D>(e, K, o);
      StudyRow row{K,
                   plan.N,
                   mode,
                   out.epsilon,
                   out.epsilon_at_K,
                   out.budget.E,
                   out.recon.l2_error,
                   out.recon.rho_cut,
                   o.taper,
                   t_sample + std::chrono::duration<double>(clock::now() - t1).count()};
      res.rows.push_back(row);
      (mode == DataMode::near ? kn : kf).push_back(K);
      (mode == DataMode::near ? en : ef).push_back(row.l2_error);
      if (keep_outcomes) res.outcomes.push_back(std::move(out));
    }
  }
  if (kn.size() >= 2) res.slope_near = loglog_slope(kn, en);
  if (kf.size() >= 2) res.slope_far = loglog_slope(kf, ef);
  return res;
}

}  // namespace sthm
