// One line per acceptance criterion; exit status is zero when the failures equal the --expect-fail set.
#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <unistd.h>

#include "oracles/mpfr_bessel.hpp"
#include "sthm/correlate/exact.hpp"
#include "sthm/io/container.hpp"
#include "sthm/io/csv.hpp"
#include "sthm/run/runner.hpp"
#include "sthm/recon/study.hpp"

using namespace sthm;
using std::numbers::pi;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::vector<double> log_grid(double a, double b, int n) {
  std::vector<double> z;
  for (int i = 0; i < n; ++i) z.push_back(a * std::pow(b / a, i / double(n - 1)));
  return z;
}

std::shared_ptr<const SymbolSpec<2>> default_spec(int n = 256, double m = 3.0) {
  return std::make_shared<const SymbolSpec<2>>(make_strength<2>(Grid<2>(n, 8.0), 1.0, 1.0), m);
}

Point<2> unit(double a) { return {std::cos(a), std::sin(a)}; }

// Tolerances pinned from the acceptance table.
constexpr double kHankelTol = 1e-7;
constexpr double kPdeTol = 1e-2;
constexpr double kRadiationSlope = -1.0, kRadiationBand = 0.1;
constexpr double kBoundedChange = 0.05;
constexpr double kSigmas = 3.0;
constexpr double kIdentityTol = 1e-3, kIdentityOrder = 2.0;
constexpr double kDecayLow = 1.0, kDecayHigh = 4.0;  // factor 2 reduction within a factor-2 band
constexpr double kMonotoneBand = 0.10;

Outcome special_functions() {
  double worst = 0.0;
  for (double z : log_grid(1e-3, 1e3, 200)) {
    const cplx ref = oracle::hankel1_0_mp(z);
    worst = std::max(worst, std::abs(hankel1_0(z) - ref) / std::abs(ref));
  }
  return {worst <= kHankelTol, fmt("max rel err %.3e over 200 points (tol %.0e)", worst, kHankelTol)};
}

Outcome forward_representation() {
  const auto spec = default_spec();
  const Grid<2> g(256, 8.0);
  const auto f = sample_realization<2>(spec, g, derive_seed(1, 2, 0));
  double pde = 0.0;
  for (double k : {4.0, 8.0, 16.0}) {
    const double hs = 0.01 / k;
    for (double rr : {1.2, 1.5, 1.8})
      for (double a : {0.3, 2.1, 4.4}) {
        const auto st = solve_u<2>(f, k, stencil_points<2>(rr * unit(a), hs));
        pde = std::max(pde, pde_residual<2>(st, hs, k, 0.0) / std::abs(st[0]));
      }
  }
  // Fit over r ∈ [10, 100]·diam with diam = 2r0 = 2.
  std::vector<double> rs, res;
  for (double r : log_grid(20.0, 200.0, 9)) {
    rs.push_back(r);
    res.push_back(radiation_residual<2>(f, 8.0, r * unit(0.9)));
  }
  const double slope = loglog_slope(rs, res);
  // Boundedness for m ∈ (d-1, d]: same white noise on a grid and its refinement.
  const auto fine = default_spec(512, 2.0);
  const auto coarse = default_spec(256, 2.0);
  const auto& gf = fine->strength().grid;
  const auto& gc = coarse->strength().grid;
  const auto w = white_noise_spectrum<2>(gf, derive_seed(1, 3, 0));
  const auto ff = colour_noise<2>(fine, gf, w);
  const auto fc = colour_noise<2>(coarse, gc, restrict_noise_spectrum<2>(gf, w, gc));
  const std::vector<Point<2>> probes{{0.0, 0.0}, {0.31, -0.22}, {-0.55, 0.4}, {0.1, 0.8}, {1.4, 0.3}, {-1.2, -1.5}};
  double peak_f = 0.0, peak_c = 0.0;
  for (const auto& v : solve_u<2>(ff, 8.0, probes)) peak_f = std::max(peak_f, std::abs(v));
  for (const auto& v : solve_u<2>(fc, 8.0, probes)) peak_c = std::max(peak_c, std::abs(v));
  const double change = std::abs(peak_f - peak_c) / peak_f;
  const bool ok = pde <= kPdeTol && std::abs(slope - kRadiationSlope) <= kRadiationBand && change < kBoundedChange;
  return {ok, fmt("pde residual %.2e, radiation slope %.3f, max|u| change %.2f%% (m=2)", pde, slope, 100 * change)};
}

Outcome covariance_fidelity() {
  const auto spec = default_spec(256, 3.0);
  const auto& g = spec->strength().grid;
  std::vector<FieldRealization<2>> rs;
  for (int i = 0; i < 2000; ++i) rs.push_back(sample_realization<2>(spec, g, derive_seed(3, 1, i)));
  const std::vector<std::pair<Point<2>, Point<2>>> pairs{{{0.0, 0.0}, {0.25, 0.0}},
                                                         {{0.125, 0.125}, {-0.25, 0.125}},
                                                         {{0.0, -0.25}, {0.0, 0.25}},
                                                         {{0.5, 0.0}, {0.0, 0.0}},
                                                         {{-0.25, -0.25}, {0.25, 0.25}},
                                                         {{0.0, 0.0}, {0.0, 0.0}}};
  const auto est = empirical_covariance<2>(rs, pairs);
  double worst = 0.0;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const double ref = covariance_analytic<2>(*spec, pairs[p].first, pairs[p].second);
    worst = std::max(worst, std::abs(est[p].mean - ref) / est[p].std_error);
  }
  return {worst <= kSigmas, fmt("worst |emp - analytic| = %.2f sigma over 5 pairs + variance", worst)};
}

Outcome green_identity() {
  const auto spec = default_spec();
  const Grid<2> g(256, 8.0);
  double worst = 0.0;
  int min_per_wavelength = 1 << 30;
  for (int r = 0; r < 4; ++r) {
    const auto f = sample_realization<2>(spec, g, derive_seed(4, 1, r));
    for (double k : {4.0, 8.0, 16.0}) {
      const auto s = make_surface_grid<2>(2.0, k);
      min_per_wavelength = std::min(min_per_wavelength, static_cast<int>(s.size() / (k * 2.0)));
      worst = std::max(worst, check_identity<2>(f, k, unit(0.6 + r), s));
    }
  }
  const auto f = sample_realization<2>(spec, g, derive_seed(4, 1, 0));
  const double e1 = check_identity<2>(f, 16.0, unit(0.6), make_surface_grid_with<2>(2.0, 48));
  const double e2 = check_identity<2>(f, 16.0, unit(0.6), make_surface_grid_with<2>(2.0, 64));
  const double order = std::log(e1 / e2) / std::log(64.0 / 48.0);
  return {worst <= kIdentityTol && order >= kIdentityOrder && min_per_wavelength >= 10,
          fmt("max mismatch %.2e, refinement order %.2f, >= %d nodes per wavelength", worst, order, min_per_wavelength)};
}

// Eight test frequencies on a golden-angle spiral, |ξ| ≤ 6 < 8.
std::vector<Point<2>> test_frequencies() {
  std::vector<Point<2>> xs;
  const double radii[] = {0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 5.0, 6.0};
  for (int i = 0; i < 8; ++i) xs.push_back(radii[i] * unit(i * pi * (3.0 - std::sqrt(5.0))));
  return xs;
}

struct ChainRow {
  double K;
  double bias;      // max over ξ of |exact expectation - ĥ|
  double mc_sigmas; // max over ξ of |MC - exact| / σ
  double sigma;     // max reported σ
  std::vector<cplx> mc, exact;
  std::vector<double> se;
};

struct Chains {
  std::vector<ChainRow> near, far;
};

const Chains& chains() {
  static const Chains c = [] {
    const auto spec = default_spec();
    const auto& h = spec->strength();
    const DiscreteCovariance<2> cov(*spec, h.grid);
    const auto e = sample_support_ensemble<2>(spec, h.grid, 5, 1, 16384);
    const auto xs = test_frequencies();
    Chains out;
    for (double K : {8.0, 16.0, 32.0}) {
      const double scale = std::pow(K, spec->m());
      std::vector<Point<2>> dirs;
      std::vector<DirectionPairIndex> pairs;
      for (const auto& x : xs) {
        const auto [a, b] = direction_pair<2>(x, K);
        pairs.push_back({dirs.size(), dirs.size() + 1});
        dirs.push_back(a);
        dirs.push_back(b);
      }
      const auto surface = make_surface_grid<2>(2.0, K);
      const auto recs = estimate_near_design<2>(e, surface, K, dirs, pairs);
      ChainRow nr{K, 0.0, 0.0, 0.0, {}, {}, {}};
      for (std::size_t i = 0; i < xs.size(); ++i) {
        const cplx truth = h.transform(xs[i]);
        const cplx ex = scale * exact_near<2>(cov, surface, K, dirs[2 * i], dirs[2 * i + 1]).sum();
        const cplx mc = scale * recs[i].sum();
        const double se = scale * recs[i].sum_std_error;
        nr.bias = std::max(nr.bias, std::abs(ex - truth));
        nr.mc_sigmas = std::max(nr.mc_sigmas, std::abs(mc - ex) / se);
        nr.sigma = std::max(nr.sigma, se);
        nr.mc.push_back(mc);
        nr.exact.push_back(ex);
        nr.se.push_back(se);
      }
      out.near.push_back(nr);

      std::vector<double> etas;
      std::vector<Point<2>> xhats;
      for (const auto& x : xs) {
        etas.push_back(norm(x) / K);
        xhats.push_back((1.0 / norm(x)) * x);
      }
      const auto far = estimate_far_design<2>(e, K, etas, xhats);
      ChainRow fr{K, 0.0, 0.0, 0.0, {}, {}, {}};
      for (std::size_t i = 0; i < xs.size(); ++i) {
        const auto& rec = far[i * xs.size() + i];
        FarCorrRecord<2> ex = rec;
        ex.corr = exact_far<2>(cov, K, etas[i], xhats[i]);
        const cplx truth = h.transform(xs[i]);
        fr.bias = std::max(fr.bias, std::abs(ex.normalized() - truth));
        fr.mc_sigmas = std::max(fr.mc_sigmas, std::abs(rec.normalized() - ex.normalized()) / rec.normalized_std_error());
        fr.sigma = std::max(fr.sigma, rec.normalized_std_error());
        fr.mc.push_back(rec.normalized());
        fr.exact.push_back(ex.normalized());
        fr.se.push_back(rec.normalized_std_error());
      }
      out.far.push_back(fr);
    }
    return out;
  }();
  return c;
}

Outcome decay(const std::vector<ChainRow>& rows, const char* name) {
  bool ok = true;
  std::string d = std::string(name) + " bias";
  for (const auto& r : rows) {
    d += fmt(" K=%g:%.4f", r.K, r.bias);
    ok = ok && r.mc_sigmas <= kSigmas;
  }
  d += "; reduction";
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double ratio = rows[i - 1].bias / rows[i].bias;
    d += fmt(" x%.2f", ratio);
    ok = ok && ratio >= kDecayLow && ratio <= kDecayHigh;
  }
  double mc = 0.0, sig = 0.0;
  for (const auto& r : rows) mc = std::max(mc, r.mc_sigmas), sig = std::max(sig, r.sigma);
  d += fmt("; MC within %.2f sigma (sigma <= %.2e)", mc, sig);
  return {ok, d};
}

Outcome near_chain() { return decay(chains().near, "near"); }

Outcome far_chain() {
  auto out = decay(chains().far, "far");
  // Agreement on |ξ| ≤ K: each chain's budget is its deterministic bias plus 3σ.
  double worst = 0.0;
  const auto xs = test_frequencies();
  for (std::size_t j = 0; j < chains().far.size(); ++j) {
    const auto& n = chains().near[j];
    const auto& f = chains().far[j];
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (norm(xs[i]) > f.K) continue;
      const double budget = n.bias + f.bias + kSigmas * std::hypot(n.se[i], f.se[i]);
      worst = std::max(worst, std::abs(n.mc[i] - f.mc[i]) / budget);
    }
  }
  out.pass = out.pass && worst <= 1.0;
  out.detail += fmt("; near/far gap <= %.2f of combined budget", worst);
  return out;
}

std::string slurp(const fs::path& p) { return io::read_file(p.string()); }

fs::path scratch() {
  static const fs::path p = [] {
    const auto q = fs::temp_directory_path() / ("sthm_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(q);
    fs::create_directories(q);
    return q;
  }();
  return p;
}

std::string study_log;

int run_study(const fs::path& out, int workers) {
  std::ifstream in(fs::path(STHM_CONFIG_DIR) / "default.json");
  auto j = nlohmann::json::parse(in);
  j["output"] = out.string();
  run::Invocation inv{run::Command::study, io::parse_config(j), workers, false};
  std::ostringstream log;
  const int code = run::execute(inv, log);
  study_log += log.str();
  return code;
}

Outcome increasing_stability() {
  const auto out = scratch() / "study_w1";
  if (run_study(out, 1) != 0) return {false, "study run failed: " + study_log};
  const auto t = io::CsvTable::parse(slurp(out / "study.csv"));
  std::map<std::string, std::vector<double>> K, err;
  for (std::size_t r = 0; r < t.rows(); ++r) {
    K[t.text(r, "mode")].push_back(t.number(r, "K"));
    err[t.text(r, "mode")].push_back(t.number(r, "l2_error"));
  }
  bool ok = t.rows() == 6;
  std::string d;
  for (const auto& [mode, e] : err) {
    const double slope = loglog_slope(K[mode], e);
    d += mode + " l2";
    for (double v : e) d += fmt(" %.4f", v);
    d += fmt(" slope %.3f; ", slope);
    for (std::size_t i = 1; i < e.size(); ++i) ok = ok && e[i] <= (1.0 + kMonotoneBand) * e[i - 1];
    ok = ok && slope < 0.0;
  }
  return {ok, d + fmt("%zu rows", t.rows())};
}

Outcome truncation_law() {
  const auto spec = default_spec();
  const auto& h = spec->strength();
  const auto xi = full_xi_grid<2>(h.grid);
  const auto t = true_spectrum<2>(h, xi);
  const auto truth = sample_strength<2>(h, h.grid);
  std::vector<double> rhos, errs;
  bool monotone = true;
  for (double rho = 2.0; rho <= 16.0 + 1e-12; rho *= std::pow(2.0, 0.25)) {
    const auto r = invert_spectrum<2>(t, rho, false);
    const double e = l2_error<2>(r.field, truth, 1e9);
    if (!errs.empty() && !(e * e <= errs.back())) monotone = false;
    rhos.push_back(rho);
    errs.push_back(e * e);
  }
  const double slope = loglog_slope(rhos, errs);
  // s_eff from the bump's spectral decay: monotone envelope sup_{|ξ|≥ρ} |ĥ|²|ξ|^d ~ ρ^{-2 s_eff},
  // taken over the radial lobes so the zeros of ĥ do not bias the fit.
  const double dr = 0.25 * xi.spacing();
  std::vector<double> shell(1024, 0.0), count(1024, 0.0);
  for (std::size_t i = 0; i < xi.grid.size(); ++i) {
    const auto b = static_cast<std::size_t>(norm(xi.grid.frequency(i)) / dr);
    if (b < shell.size()) shell[b] += std::norm(t.values[i]), count[b] += 1.0;
  }
  std::vector<double> envelope(shell.size(), 0.0);
  double run = 0.0;
  for (std::size_t b = shell.size(); b-- > 0;) {
    if (count[b] > 0.0) run = std::max(run, shell[b] / count[b] * std::pow((b + 0.5) * dr, 2.0));
    envelope[b] = run;
  }
  std::vector<double> env;
  for (double rho : rhos) env.push_back(envelope[static_cast<std::size_t>(rho / dr)]);
  const double s_eff = -0.5 * loglog_slope(rhos, env);
  return {monotone && slope <= -2.0 * s_eff,
          fmt("monotone=%s, error slope %.3f vs -2 s_eff = %.3f over rho in [2, 16]", monotone ? "yes" : "no", slope,
              -2.0 * s_eff)};
}

Outcome determinism() {
  const auto a = scratch() / "study_w1";
  const auto b = scratch() / "study_w3";
  if (!fs::exists(a / run::kManifestName) && run_study(a, 1) != 0) return {false, "first study run failed"};
  if (run_study(b, 3) != 0) return {false, "second study run failed"};
  std::size_t compared = 0, differ = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    const auto name = e.path().filename().string();
    const auto ext = e.path().extension();
    if (name == "study_timing.csv" || (ext != ".csv" && ext != ".sthm")) continue;
    ++compared;
    if (!fs::exists(b / name) || slurp(e.path()) != slurp(b / name)) ++differ;
  }
  return {compared > 0 && differ == 0,
          fmt("%zu outputs compared between 1 and 3 workers, %zu differ (timing table excluded)", compared, differ)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::vector<int> expect_fail, only;
  app.add_option("--expect-fail", expect_fail, "criteria known to fail")->delimiter(',');
  app.add_option("--only", only, "run a subset")->delimiter(',');
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
      {1, special_functions}, {2, forward_representation}, {3, covariance_fidelity},
      {4, green_identity},    {5, near_chain},             {6, far_chain},
      {7, increasing_stability}, {8, truncation_law},      {9, determinism}};
  const std::set<int> expected(expect_fail.begin(), expect_fail.end());
  const std::set<int> subset(only.begin(), only.end());
  std::set<int> failed, ran;
  for (const auto& [id, fn] : criteria) {
    if (!subset.empty() && !subset.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    ran.insert(id);
    if (!o.pass) failed.insert(id);
    std::printf("criterion %d: %s  %s  [%.1f s]%s\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str(), s,
                !o.pass && expected.count(id) ? "  (expected)" : "");
    std::fflush(stdout);
  }
  std::set<int> expected_ran;
  for (int id : expected)
    if (ran.count(id)) expected_ran.insert(id);
  fs::remove_all(scratch());
  if (failed == expected_ran) return 0;
  for (int id : expected_ran)
    if (!failed.count(id)) std::printf("criterion %d passed but is listed as expected to fail\n", id);
  return 1;
}
