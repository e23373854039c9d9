#include <gtest/gtest.h>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/ooura_fourier_integrals.hpp>
#include <cmath>
#include <cstring>
#include <numbers>

#include "sthm/randfield/covariance.hpp"

using namespace sthm;
using std::numbers::pi;

namespace {

// G(r) = Γ(m/2)^{-1} ∫_0^∞ t^{m/2-1} e^{-tδ²} (4πt)^{-d/2} e^{-r²/4t} dt.
double subordination_covariance(int d, double m, double delta, double r) {
  boost::math::quadrature::exp_sinh<double> integrator;
  auto f = [&](double t) {
    return std::pow(t, 0.5 * m - 1.0) * std::exp(-t * delta * delta - r * r / (4.0 * t)) *
           std::pow(4.0 * pi * t, -0.5 * d);
  };
  return integrator.integrate(f, 1e-14) / std::tgamma(0.5 * m);
}

std::shared_ptr<const SymbolSpec<2>> default_spec(int n, double L, double m, double amp = 1.0) {
  Grid<2> g(n, L);
  return std::make_shared<const SymbolSpec<2>>(make_strength<2>(g, 1.0, amp), m, 1.0);
}

}  // namespace

TEST(Strength, BumpProfile) {
  Grid<2> g(64, 8.0);
  auto h = make_strength<2>(g, 1.0, 2.5);
  EXPECT_DOUBLE_EQ(h->at({0.0, 0.0}), 2.5);
  EXPECT_EQ(h->at({1.0, 0.0}), 0.0);
  EXPECT_EQ(h->at({0.6, 0.8}), 0.0);
  EXPECT_GT(h->at({0.5, 0.5}), 0.0);
  for (std::size_t f = 0; f < g.size(); ++f) {
    EXPECT_GE(h->values[f], 0.0);
    if (norm(g.point(f)) >= 1.0) {
      EXPECT_EQ(h->values[f], 0.0);
    }
  }
  EXPECT_THROW(make_strength<2>(g, 2.0, 1.0), GeometryError);
}

TEST(Strength, SobolevBudgetFiniteAndOrdered) {
  Grid<2> g(128, 8.0);
  auto h1 = make_strength<2>(g, 1.0, 1.0, 1.0);
  auto h2 = make_strength<2>(g, 1.0, 1.0, 2.0);
  auto h4 = make_strength<2>(g, 1.0, 1.0, 4.0);
  EXPECT_TRUE(std::isfinite(h4->Q));
  EXPECT_GT(h2->Q, h1->Q);
  EXPECT_GT(h4->Q, h2->Q);
  // s = 0 is the L² norm.
  auto h0 = make_strength<2>(g, 1.0, 1.0, 0.0);
  double l2 = 0.0;
  for (double v : h0->values) l2 += v * v * g.cell_volume();
  EXPECT_NEAR(h0->Q, std::sqrt(l2), 1e-12);
}

TEST(Symbol, RejectsLowOrder) {
  Grid<2> g(64, 8.0);
  auto h = make_strength<2>(g, 1.0, 1.0);
  EXPECT_THROW(SymbolSpec<2>(h, 1.0), DomainError);
  EXPECT_THROW(SymbolSpec<2>(h, 0.5), DomainError);
  EXPECT_NO_THROW(SymbolSpec<2>(h, 1.01));
  Grid<3> g3(16, 8.0);
  EXPECT_THROW(SymbolSpec<3>(make_strength<3>(g3, 1.0, 1.0), 2.0), DomainError);
}

TEST(Symbol, RemainderBound) {
  for (double m : {1.5, 2.0, 3.0, 4.0}) {
    auto spec = default_spec(64, 8.0, m, 1.7);
    const Grid<2>& g = spec->strength().grid;
    const double hx = spec->strength().max_value();
    double worst = 0.0;
    for (std::size_t f = 0; f < g.size(); ++f) {
      const double rho = norm(g.frequency(f));
      if (rho < 1.0) continue;
      worst = std::max(worst, std::abs(spec->remainder(hx, rho)) * std::pow(rho, m + 1.0));
    }
    EXPECT_LE(worst, spec->M()) << m;
  }
}

TEST(Sampling, ZeroAmplitudeGivesZeroField) {
  auto spec = default_spec(64, 8.0, 3.0, 0.0);
  const auto f = sample_realization<2>(spec, spec->strength().grid, 11);
  for (double v : f.values) EXPECT_EQ(v, 0.0);
}

TEST(Sampling, SeedDeterminismRealnessSupport) {
  auto spec = default_spec(128, 8.0, 3.0);
  const auto& g = spec->strength().grid;
  const auto a = sample_realization<2>(spec, g, 42);
  const auto b = sample_realization<2>(spec, g, 42);
  const auto c = sample_realization<2>(spec, g, 43);
  EXPECT_EQ(std::memcmp(a.values.data(), b.values.data(), a.values.size() * sizeof(double)), 0);
  EXPECT_NE(a.values, c.values);
  EXPECT_LE(a.imag_residue, 1e-12);
  for (std::size_t f = 0; f < g.size(); ++f)
    if (spec->strength().values[f] == 0.0) {
      EXPECT_EQ(a.values[f], 0.0);
    }
}

TEST(Sampling, RestrictedNoiseStaysHermitian) {
  auto fine = default_spec(128, 8.0, 3.0);
  auto coarse = default_spec(64, 8.0, 3.0);
  const auto& gf = fine->strength().grid;
  const auto& gc = coarse->strength().grid;
  const auto w = white_noise_spectrum<2>(gf, 5);
  const auto wc = restrict_noise_spectrum<2>(gf, w, gc);
  const auto fc = colour_noise<2>(coarse, gc, wc);
  EXPECT_LE(fc.imag_residue, 1e-12);
  for (std::size_t f = 0; f < gc.size(); ++f) {
    const auto idx = gc.unflatten(f);
    if (idx[0] == 0 || idx[1] == 0) continue;
    EXPECT_EQ(wc[f], w[gf.flatten({idx[0] + 32, idx[1] + 32})]);
  }
}

TEST(Sampling, ContinuityStabilizesUnderRefinement) {
  // m = d + 2: the sampled field is continuous, so its grid maximum converges.
  const double m = 4.0;
  auto s256 = default_spec(256, 8.0, m);
  auto s128 = default_spec(128, 8.0, m);
  auto s64 = default_spec(64, 8.0, m);
  const auto w = white_noise_spectrum<2>(s256->strength().grid, 77);
  auto peak = [&](const std::shared_ptr<const SymbolSpec<2>>& s) {
    const auto& g = s->strength().grid;
    const auto f = colour_noise<2>(s, g, restrict_noise_spectrum<2>(s256->strength().grid, w, g));
    double mx = 0.0;
    for (double v : f.values) mx = std::max(mx, std::abs(v));
    return mx;
  };
  const double p64 = peak(s64), p128 = peak(s128), p256 = peak(s256);
  EXPECT_LT(std::abs(p256 - p128), 0.05 * p256);
  EXPECT_LT(std::abs(p128 - p64), 0.05 * p128);
}

TEST(Sampling, GaussianMoments) {
  auto spec = default_spec(64, 8.0, 3.0);
  const auto& g = spec->strength().grid;
  const std::size_t x0 = g.flatten(g.locate({0.25, -0.25}));
  const int N = 2000;
  std::vector<double> v;
  for (int i = 0; i < N; ++i) v.push_back(sample_realization<2>(spec, g, derive_seed(9, 1, i)).values[x0]);
  double mean = 0.0;
  for (double x : v) mean += x / N;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double x : v) {
    const double d = x - mean;
    m2 += d * d / N;
    m3 += d * d * d / N;
    m4 += d * d * d * d / N;
  }
  EXPECT_LE(std::abs(m3 / std::pow(m2, 1.5)), 5.0 / std::sqrt(N));
  // 5/√N is about one standard error of the excess kurtosis, so three standard errors are used.
  EXPECT_LE(std::abs(m4 / (m2 * m2) - 3.0), 3.0 * std::sqrt(24.0 / N));
}

TEST(Sampling, PointwiseVarianceAtOrigin) {
  auto spec = default_spec(128, 8.0, 3.0);
  const auto& g = spec->strength().grid;
  double sum = 0.0;
  for (std::size_t f = 0; f < g.size(); ++f) {
    const auto xi = g.frequency(f);
    sum += std::pow(1.0 + dot(xi, xi), -1.5);
  }
  const double expected = spec->strength().at({0.0, 0.0}) * sum * g.dual_cell_volume() / std::pow(2.0 * pi, 2);
  std::vector<FieldRealization<2>> rs;
  for (int i = 0; i < 2000; ++i) rs.push_back(sample_realization<2>(spec, g, derive_seed(3, 1, i)));
  const auto est = empirical_covariance<2>(rs, {{{0.0, 0.0}, {0.0, 0.0}}});
  EXPECT_LE(std::abs(est[0].mean - expected), 3.0 * est[0].std_error);
  EXPECT_NEAR(discrete_covariance<2>(*spec, g, {0.0, 0.0}), expected, 1e-12 * expected);
}

TEST(Covariance, ClosedFormsMatchSubordinationIntegral) {
  for (double m : {1.5, 2.0, 3.0, 4.5}) {
    for (double r : {0.1, 0.5, 2.0}) {
      const double ref = subordination_covariance(2, m, 1.0, r);
      EXPECT_NEAR(matern_covariance(2, m, 1.0, r) / ref, 1.0, 1e-9) << m << " " << r;
    }
  }
  for (double m : {2.5, 3.0, 4.0}) {
    for (double r : {0.1, 0.5, 2.0}) {
      const double ref = subordination_covariance(3, m, 1.3, r);
      EXPECT_NEAR(matern_covariance(3, m, 1.3, r) / ref, 1.0, 1e-9) << m << " " << r;
    }
  }
  EXPECT_NEAR(matern_covariance(2, 4.0, 1.0, 0.0) / subordination_covariance(2, 4.0, 1.0, 0.0), 1.0, 1e-9);
}

TEST(Covariance, RadialFourierOracleInThreeDimensions) {
  // G(r) = (2π² r)^{-1} ∫_0^∞ ρ sin(ρr) (δ²+ρ²)^{-m/2} dρ.
  boost::math::quadrature::ooura_fourier_sin<double> integrator;
  const double m = 4.0, r = 0.5;
  auto [val, err] = integrator.integrate([m](double rho) { return rho * std::pow(1.0 + rho * rho, -0.5 * m); }, r);
  EXPECT_NEAR(matern_covariance(3, m, 1.0, r) / (val / (2.0 * pi * pi * r)), 1.0, 1e-8);
  EXPECT_NEAR(matern_covariance(3, m, 1.0, r), std::exp(-r) / (8.0 * pi), 1e-14);
}

TEST(Covariance, MaternHalfFamilyAndSmallLagShape) {
  // m = d + 1 in 2D: G = e^{-δr}/(2πδ), so G(0) - G(r) is linear in r.
  for (double r : {0.5, 0.01, 1e-4}) EXPECT_NEAR(matern_covariance(2, 3.0, 1.0, r), std::exp(-r) / (2.0 * pi), 1e-14);
  const double slope = (matern_covariance(2, 3.0, 1.0, 0.0) - matern_covariance(2, 3.0, 1.0, 1e-3)) / 1e-3;
  EXPECT_NEAR(slope, 1.0 / (2.0 * pi), 1e-3);
  // m = d: logarithmic.
  const double a = matern_covariance(2, 2.0, 1.0, 1e-4) + std::log(1e-4) / (2.0 * pi);
  const double b = matern_covariance(2, 2.0, 1.0, 1e-6) + std::log(1e-6) / (2.0 * pi);
  EXPECT_NEAR(a, b, 1e-6);
  // d - 1 < m < d: power law r^{m-d}.
  const double p1 = matern_covariance(2, 1.5, 1.0, 1e-4) * std::pow(1e-4, 0.5);
  const double p2 = matern_covariance(2, 1.5, 1.0, 1e-6) * std::pow(1e-6, 0.5);
  EXPECT_NEAR(p1 / p2, 1.0, 1e-2);
}

TEST(Covariance, AnalyticKernel) {
  auto spec = default_spec(64, 8.0, 3.0, 2.0);
  EXPECT_EQ(covariance_analytic<2>(*spec, {1.5, 0.0}, {0.0, 0.0}), 0.0);
  const Point<2> x{0.2, 0.1}, y{-0.3, 0.1};
  const double hx = spec->strength().at(x), hy = spec->strength().at(y);
  EXPECT_NEAR(covariance_analytic<2>(*spec, x, y), std::sqrt(hx * hy) * std::exp(-0.5) / (2.0 * pi), 1e-14);
}

TEST(Covariance, PeriodicWrapLeakageBounded) {
  auto spec = default_spec(128, 8.0, 3.0);
  const auto& g = spec->strength().grid;
  const double half = 0.5 * g.side();
  const double leak = discrete_covariance<2>(*spec, g, {half, 0.0});
  EXPECT_LE(std::abs(leak), 2.0 * matern_covariance(2, 3.0, 1.0, half) * 1.05 + 1e-4);
}

TEST(Covariance, EmpiricalMatchesAnalytic) {
  auto spec = default_spec(128, 8.0, 3.0);
  const auto& g = spec->strength().grid;
  std::vector<FieldRealization<2>> rs;
  for (int i = 0; i < 2000; ++i) rs.push_back(sample_realization<2>(spec, g, derive_seed(21, 1, i)));
  const std::vector<std::pair<Point<2>, Point<2>>> pairs{{{0.0, 0.0}, {0.25, 0.0}},
                                                         {{0.125, 0.125}, {-0.25, 0.125}},
                                                         {{0.0, -0.25}, {0.0, 0.25}},
                                                         {{0.5, 0.0}, {0.0, 0.0}},
                                                         {{-0.25, -0.25}, {0.25, 0.25}}};
  const auto est = empirical_covariance<2>(rs, pairs);
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const double ref = covariance_analytic<2>(*spec, pairs[p].first, pairs[p].second);
    EXPECT_LE(std::abs(est[p].mean - ref), 3.0 * est[p].std_error) << p;
  }
  const auto outside = empirical_covariance<2>(rs, {{{2.0, 0.0}, {0.0, 0.0}}});
  EXPECT_EQ(outside[0].mean, 0.0);
  EXPECT_EQ(outside[0].std_error, 0.0);
}

TEST(Covariance, EmpiricalEdgeCases) {
  auto zero = default_spec(64, 8.0, 3.0, 0.0);
  const auto& g = zero->strength().grid;
  std::vector<FieldRealization<2>> rs{sample_realization<2>(zero, g, 1), sample_realization<2>(zero, g, 2)};
  const auto e = empirical_covariance<2>(rs, {{{0.0, 0.0}, {0.0, 0.0}}});
  EXPECT_EQ(e[0].mean, 0.0);
  EXPECT_EQ(e[0].std_error, 0.0);
  auto other = default_spec(64, 8.0, 2.5);
  rs.push_back(sample_realization<2>(other, g, 3));
  EXPECT_THROW(empirical_covariance<2>(rs, {{{0.0, 0.0}, {0.0, 0.0}}}), ConsistencyError);
  EXPECT_THROW(empirical_covariance<2>({rs[0]}, {}), ConsistencyError);
}

TEST(Seeds, CounterBasedDerivation) {
  EXPECT_EQ(derive_seed(1, 2, 3), derive_seed(1, 2, 3));
  EXPECT_NE(derive_seed(1, 2, 3), derive_seed(1, 2, 4));
  EXPECT_NE(derive_seed(1, 2, 3), derive_seed(1, 3, 3));
  EXPECT_NE(derive_seed(1, 2, 3), derive_seed(2, 2, 3));
}
