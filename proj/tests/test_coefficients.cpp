#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "support.hpp"

using namespace genfpk;
using genfpk::testing::cubic_plain_ou;
using genfpk::testing::linear_ou;
using genfpk::testing::white_linear;

namespace {

QuadratureOptions generic_rule(int order = 4, double per_scale = 8.0) {
  QuadratureOptions q;
  q.closed_form = false;
  q.order = order;
  q.panels_per_scale = per_scale;
  return q;
}

MomentHistory constant_history(double t0, double t, int steps, double r, std::vector<int> degrees = {},
                               std::vector<double> r_gk = {}) {
  MomentHistory h(std::move(degrees));
  for (int i = 0; i <= steps; ++i) h.append(t0 + (t - t0) * i / steps, r, r_gk);
  return h;
}

void expect_dx_matches_fd(const DiffusionCoefficient& diff, double t, double a, double b) {
  const auto p = diff.at(t);
  for (int i = 0; i <= 40; ++i) {
    const double x = a + (b - a) * i / 40.0;
    const double d1 = (p.value(x + 1e-3) - p.value(x - 1e-3)) / 2e-3;
    const double d2 = (p.value(x + 5e-4) - p.value(x - 5e-4)) / 1e-3;
    const double exact = p.dx(x);
    // O(dx^2): halving the step cuts the error by four, up to roundoff.
    const double scale = 1.0 + std::abs(exact);
    EXPECT_NEAR(d2, exact, 1e-5 * scale) << "x=" << x;
    EXPECT_LE(std::abs(d2 - exact), 0.3 * std::abs(d1 - exact) + 1e-9 * scale) << "x=" << x;
  }
}

}  // namespace

// ---- exponential moments --------------------------------------------------

TEST(ExpMoment, MatchesQuadratureInEveryRegime) {
  for (double b : {-400.0, -30.0, -3.0, -0.2, 0.0, 0.4, 5.0, 60.0}) {
    for (int n = 0; n <= 6; ++n) {
      const double T = 1.3;
      const double ref = integrate([&](double u) { return std::exp(b * u) * std::pow(u, n); }, 0.0, T, 4000, 8);
      EXPECT_NEAR(exp_moment(b, n, T), ref, 1e-11 * std::max(1.0, std::abs(ref))) << b << " " << n;
    }
  }
}

// ---- linear effective intensity --------------------------------------------

TEST(DEffLinear, ZeroAtInitialTime) {
  const auto sc = linear_ou(-1.0, 0.5, 1.0, 1.0, 10.0);
  EXPECT_EQ(d_eff_linear(sc, 0.0), 0.0);
}

TEST(DEffLinear, StationaryPlainOu) {
  for (double tau : {0.1, 1.0, 3.0}) {
    const double kappa = 0.7, D = 1.3;
    const auto sc = linear_ou(-1.0, kappa, D, tau, 400.0);
    EXPECT_NEAR(d_eff_linear(sc, 400.0), kappa * kappa * D / (1.0 + tau), 1e-12);
  }
}

TEST(DEffLinear, WhiteNoiseHalfMass) {
  const auto sc = white_linear(-1.0, 0.5, 2.0, 5.0);
  EXPECT_NEAR(d_eff_linear(sc, 1.0), 0.25 * 2.0, 1e-15);
}

TEST(DEffLinear, NonlinearModelRejected) {
  EXPECT_THROW(d_eff_linear(cubic_plain_ou(1.0, 0.1, 5.0), 1.0), UsageError);
}

TEST(DEffLinear, ClosedFormMatchesGenericQuadrature) {
  const auto sc = linear_ou(-0.8, 0.2, 1.0, 1.0, 12.5);
  for (double t : {0.05, 1.0, 6.0, 12.5})
    EXPECT_NEAR(d_eff_linear(sc, t), d_eff_linear(sc, t, generic_rule(64)), 1e-10 * d_eff_linear(sc, t));
}

// ---- SCT ------------------------------------------------------------------

TEST(SctDn, StationaryPlainOu) {
  const double kappa = 0.6, D = 1.5, tau = 0.4;
  const auto sc = linear_ou(-1.0, kappa, D, tau, 300.0);
  EXPECT_NEAR(sct_dn(sc, 300.0, 0), kappa * kappa * D, 1e-12);
  EXPECT_NEAR(sct_dn(sc, 300.0, 1), kappa * kappa * D * tau, 1e-12);
}

TEST(SctDn, ZeroAtInitialTime) {
  const auto sc = linear_ou(-1.0, 1.0, 1.0, 1.0, 3.0);
  EXPECT_EQ(sct_dn(sc, 0.0, 0), 0.0);
  EXPECT_EQ(sct_dn(sc, 0.0, 1), 0.0);
}

TEST(SctDn, OnlyOrdersZeroAndOne) {
  const auto sc = linear_ou(-1.0, 1.0, 1.0, 1.0, 3.0);
  EXPECT_THROW(sct_dn(sc, 1.0, 2), UsageError);
  EXPECT_THROW(sct_dn(sc, 1.0, -1), UsageError);
}

TEST(SctDiffusion, LinearModelIsXIndependent) {
  const auto sc = linear_ou(-0.5, 1.0, 1.0, 0.5, 10.0);
  const auto B = sct_diffusion(sc);
  EXPECT_TRUE(B.x_independent());
  const double expect = sct_dn(sc, 4.0, 0) + sct_dn(sc, 4.0, 1) * -0.5;
  for (double x : {-3.0, 0.0, 2.0}) EXPECT_NEAR(B(x, 4.0), expect, 1e-14);
}

TEST(SctDiffusion, BistableOriginSmallTau) {
  const double tau = 0.05, D = 1.0;
  const auto B = sct_diffusion(cubic_plain_ou(D, tau, 100.0));
  EXPECT_NEAR(B(0.0, 100.0), D * (1.0 + tau), 1e-12);
  EXPECT_GT(B(0.0, 100.0), 0.0);
}

TEST(SctDiffusion, BistableTau03NegativeAtLargeX) {
  const auto B = sct_diffusion(bistable_scenario(1.0, 0.3));
  EXPECT_LT(B(2.5, 10.0), 0.0);
}

TEST(SctValidity, SmallTauValidOnComputationalDomain) {
  const auto B = sct_diffusion(bistable_scenario(1.0, 0.1));
  const auto v = check_sct_validity(B, linspace(-2.6, 2.6, 521), 10.0);
  EXPECT_TRUE(v.valid);
  EXPECT_GT(v.value, 0.0);
}

TEST(SctValidity, ZeroCrossingOfScaledSmallTau) {
  // D/2 + (D tau / 4)(1 - 3 x^2) vanishes at x^2 = (2 / tau + 1) / 3.
  const auto B = sct_diffusion(bistable_scenario(1.0, 0.1));
  const double xc = std::sqrt((2.0 / 0.1 + 1.0) / 3.0);
  EXPECT_GT(B(xc - 1e-3, 50.0), 0.0);
  EXPECT_LT(B(xc + 1e-3, 50.0), 0.0);
}

TEST(SctValidity, Tau03ReportsNegativity) {
  const auto B = sct_diffusion(bistable_scenario(1.0, 0.3));
  const auto v = check_sct_validity(B, linspace(-3.0, 3.0, 601), 10.0);
  EXPECT_FALSE(v.valid);
  EXPECT_LE(v.value, 0.0);
  EXPECT_GT(std::abs(v.x), 1.0);
}

TEST(SctValidity, VanishingTauValid) {
  const auto B = sct_diffusion(bistable_scenario(1.0, 1e-4));
  EXPECT_TRUE(check_sct_validity(B, linspace(-3.0, 3.0, 601), 10.0).valid);
}

TEST(SctValidity, RejectsOtherKinds) {
  const auto B = fox_diffusion(bistable_scenario(1.0, 0.1));
  EXPECT_THROW(check_sct_validity(B, {0.0}, 1.0), UsageError);
}

// ---- Fox -------------------------------------------------------------------

TEST(FoxDiffusion, LinearEqualsDEff) {
  const auto sc = linear_ou(-0.8, 0.2, 1.0, 1.0, 12.5);
  const auto B = fox_diffusion(sc);
  EXPECT_TRUE(B.x_independent());
  for (double t : {0.0, 0.3, 5.0, 12.5})
    for (double x : {-2.0, 0.0, 1.0}) EXPECT_NEAR(B(x, t), d_eff_linear(sc, t), 1e-14);
}

TEST(FoxDiffusion, StationaryPlainOu) {
  const double D = 1.2, tau = 0.25;
  const auto sc = cubic_plain_ou(D, tau, 200.0);
  const auto B = fox_diffusion(sc);
  for (double x : {-1.5, -0.4, 0.0, 0.3, 1.1}) {
    const double hp = sc.model.h_prime(x);
    ASSERT_LT(tau * hp, 1.0);
    EXPECT_NEAR(B(x, 200.0), D / (1.0 - tau * hp), 1e-10);
  }
}

TEST(FoxDiffusion, BistableOriginTau01) {
  const auto B = fox_diffusion(cubic_plain_ou(1.0, 0.1, 200.0));
  EXPECT_NEAR(B(0.0, 200.0), 1.0 / 0.9, 1e-10);
}

TEST(FoxDiffusion, FirstOrderExpansionIsSct) {
  // Fox / SCT - 1 = O(tau^2) at fixed x.
  for (double x : {-1.2, 0.0, 0.7}) {
    double prev = 0.0;
    for (double tau : {4e-3, 2e-3, 1e-3}) {
      const auto sc = cubic_plain_ou(1.0, tau, 50.0);
      const double gap = std::abs(fox_diffusion(sc)(x, 50.0) / sct_diffusion(sc)(x, 50.0) - 1.0);
      if (prev > 0.0) EXPECT_NEAR(prev / gap, 4.0, 0.1) << x;
      prev = gap;
    }
  }
}

TEST(FoxDiffusion, ClosedFormMatchesQuadrature) {
  const auto sc = bistable_scenario(1.0, 0.5);
  const auto exact = fox_diffusion(sc).at(3.0);
  const auto quad = fox_diffusion(sc, generic_rule(8, 16.0)).at(3.0);
  for (double x : {-2.0, -1.0, 0.0, 0.5, 1.7}) {
    EXPECT_NEAR(quad.value(x), exact.value(x), 1e-9 * std::abs(exact.value(x)));
    EXPECT_NEAR(quad.dx(x), exact.dx(x), 1e-9 * (1.0 + std::abs(exact.dx(x))));
  }
}

// ---- derivative evaluators --------------------------------------------------

TEST(DiffusionDx, MatchesFiniteDifferences) {
  const auto sc = bistable_scenario(1.0, 0.3);
  expect_dx_matches_fd(sct_diffusion(sc), 2.0, -2.5, 2.5);
  expect_dx_matches_fd(fox_diffusion(sc), 2.0, -2.5, 2.5);
  expect_dx_matches_fd(fox_diffusion(sc, generic_rule()), 2.0, -2.5, 2.5);

  NoiseSpec noise;
  noise.kernel = OuKernel{0.8, 0.6, OuConvention::plain};
  const Scenario multi(ModelSpec({{1, 0.5}, {2, 0.3}, {3, -1.0}}, 1.0, 0.0, 5.0), noise, InitialSpec(0.1, 0.3));
  expect_dx_matches_fd(vada_diffusion(multi, 4, {0.9, 0.3, 0.1, 0.05, 0.01}, {0.2, 1.1}), 1.0, -2.0, 2.0);
  expect_dx_matches_fd(vada_diffusion(sc, 2, {0.9, 0.3, 0.1}, {0.8}), 1.0, -2.0, 2.0);
}

// ---- quadrature refinement -------------------------------------------------

TEST(CoefficientIntegrals, RefinementStable) {
  const auto sc = bistable_scenario(2.0, 1.0);
  const QuadratureOptions coarse = generic_rule(4, 8.0);
  const QuadratureOptions fine = generic_rule(4, 16.0);
  for (double t : {0.5, 3.0, 10.0}) {
    for (int n : {0, 1}) {
      const double a = sct_dn(sc, t, n, coarse), b = sct_dn(sc, t, n, fine);
      EXPECT_LT(std::abs(a - b), 1e-8 * std::abs(b));
    }
    for (double x : {-1.5, 0.0, 1.0}) {
      const double a = fox_diffusion(sc, coarse)(x, t), b = fox_diffusion(sc, fine)(x, t);
      EXPECT_LT(std::abs(a - b), 1e-8 * std::abs(b));
    }
  }
}

// ---- multi-indices ---------------------------------------------------------

TEST(MultiIndexTable, CountsAreBinomial) {
  auto binom = [](int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return static_cast<std::size_t>(std::llround(r));
  };
  for (int slots = 1; slots <= 4; ++slots) {
    const MultiIndexTable t(slots, 6);
    for (int m = 0; m <= 6; ++m) EXPECT_EQ(t.order(m).size(), binom(m + slots - 1, slots - 1));
  }
}

TEST(MultiIndexTable, GeneratingFunctionIdentity) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int slots = 1; slots <= 4; ++slots) {
    const MultiIndexTable t(slots, 6);
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<double> phi(slots);
      double s = 0.0;
      for (auto& p : phi) s += (p = u(rng));
      double fact = 1.0;
      for (int m = 0; m <= 6; ++m) {
        if (m > 0) fact *= m;
        const double lhs = std::pow(s, m) / fact;
        EXPECT_NEAR(t.sum(m, phi), lhs, 1e-12 * std::max(1.0, std::abs(lhs)));
      }
    }
  }
}

// ---- VADA building blocks --------------------------------------------------

TEST(VadaPhi, Examples) {
  const ModelSpec bistable({{1, 1.0}, {3, -1.0}}, 1.0, 0.0, 1.0);
  EXPECT_DOUBLE_EQ(vada_phi(bistable, 3, 2.0, 3.0), -9.0);
  EXPECT_DOUBLE_EQ(vada_phi(bistable, 3, 0.5, 3.0 * 0.25), 0.0);
  const ModelSpec quad({{1, -1.0}, {2, 0.5}}, 1.0, 0.0, 1.0);
  const double m = 0.37;
  EXPECT_DOUBLE_EQ(vada_phi(quad, 2, m, 2.0 * m), 0.0);
  EXPECT_THROW(vada_phi(bistable, 1, 0.0, 0.0), UsageError);
  EXPECT_THROW(vada_phi(bistable, 2, 0.0, 0.0), UsageError);
}

TEST(VadaExpFactor, Examples) {
  const auto h = constant_history(0.0, 2.0, 40, -0.7);
  EXPECT_DOUBLE_EQ(vada_exp_factor(h, 1.3, 1.3), 1.0);
  EXPECT_NEAR(vada_exp_factor(h, 0.25, 1.9), std::exp(-0.7 * 1.65), 1e-14);
  EXPECT_THROW(vada_exp_factor(h, 1.5, 1.0), UsageError);
  EXPECT_THROW(vada_exp_factor(h, 0.5, 2.5), UsageError);
}

TEST(VadaDmEff, LinearReducesToClosedForms) {
  const auto sc = linear_ou(-0.8, 0.2, 1.0, 1.0, 5.0);
  const auto h = constant_history(0.0, 3.0, 300, -0.8);
  const auto dm = vada_dm_eff(sc, h, 4);
  EXPECT_NEAR(dm[0], d_eff_linear(sc, 3.0), 1e-12);
  for (int m = 1; m <= 4; ++m)
    EXPECT_NEAR(dm[m], 0.04 * kernel_moment(sc.noise, 0.0, 3.0, -0.8, m), 1e-12) << m;
  EXPECT_NEAR(vada_dm_eff(sc, h, 3.0, 2), dm[2], 1e-16);
}

TEST(VadaDmEff, ZeroAtInitialTime) {
  const auto sc = bistable_scenario(1.0, 1.0);
  MomentHistory h({3});
  h.append(0.0, -0.08, {1.08});
  for (double v : vada_dm_eff(sc, h, 4)) EXPECT_EQ(v, 0.0);
}

TEST(VadaDmEff, WhiteNoiseHigherOrdersVanish) {
  const auto sc = white_linear(-1.0, 1.0, 0.5, 3.0);
  const auto h = constant_history(0.0, 1.0, 10, -1.0);
  const auto dm = vada_dm_eff(sc, h, 4);
  EXPECT_NEAR(dm[0], 0.5, 1e-15);
  for (int m = 1; m <= 4; ++m) EXPECT_EQ(dm[m], 0.0);
}

TEST(VadaDmEff, HistoryMustStartAtT0) {
  const auto sc = linear_ou(-1.0, 1.0, 1.0, 1.0, 5.0);
  const auto h = constant_history(0.5, 1.0, 10, -1.0);
  EXPECT_THROW(vada_dm_eff(sc, h, 2), UsageError);
  EXPECT_THROW(vada_dm_eff(sc, constant_history(0.0, 1.0, 10, -1.0), 0.7, 2), UsageError);
}

TEST(OuMemory, MatchesGenericHistoryQuadrature) {
  Scenario sc = bistable_scenario(2.0, 0.7);
  sc.noise.cross_cov.kind = CrossCovariance::Kind::exp;
  sc.noise.cross_cov.amplitude = 0.2;
  sc.noise.cross_cov.tau = 0.5;
  MomentHistory h({3});
  OuMemory mem(sc, 4);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  h.append(0.0, -0.1, {1.1});
  for (int i = 1; i <= 200; ++i) {
    const double t = 0.01 * i + 0.003 * std::sin(i);
    const double r = -0.5 + 0.4 * std::cos(t) + 0.02 * u(rng);
    h.append(t, r, {1.0 - r});
    const auto fast = mem.evaluate(h);
    const auto slow = vada_dm_eff(sc, h, 4);
    for (int m = 0; m <= 4; ++m) EXPECT_NEAR(fast[m], slow[m], 1e-12 * (1.0 + std::abs(slow[m]))) << i << " " << m;
    mem.commit(h);
  }
}

TEST(OuMemory, RejectsSkippedNodes) {
  const Scenario sc = bistable_scenario(1.0, 1.0);
  MomentHistory h({3});
  OuMemory mem(sc, 2);
  h.append(0.0, 0.0, {1.0});
  h.append(0.1, 0.0, {1.0});
  h.append(0.2, 0.0, {1.0});
  EXPECT_THROW(mem.evaluate(h), UsageError);
}

TEST(VadaDiffusion, OrderZeroIsHanggi) {
  const auto sc = bistable_scenario(1.0, 1.0);
  const auto B = vada_diffusion(sc, 0, {0.37}, {1.2});
  EXPECT_TRUE(B.x_independent());
  for (double x : {-2.0, 0.0, 1.3}) {
    EXPECT_DOUBLE_EQ(B(x, 1.0), 0.37);
    EXPECT_DOUBLE_EQ(B.dx(x, 1.0), 0.0);
  }
}

TEST(VadaDiffusion, SingleNonlinearityCollapses) {
  const auto sc = bistable_scenario(1.0, 1.0);
  const std::vector<double> dm{0.5, 0.2, 0.07, 0.03, 0.01};
  const double r = 0.9;
  const auto B = vada_diffusion(sc, 4, dm, {r});
  for (double x : {-1.7, -0.2, 0.0, 0.8}) {
    const double phi = -(3 * x * x - r);
    double expect = 0.0, fact = 1.0;
    for (int m = 0; m <= 4; ++m) {
      if (m) fact *= m;
      expect += dm[m] * std::pow(phi, m) / fact;
    }
    EXPECT_NEAR(B(x, 0.0), expect, 1e-14);
  }
}

TEST(VadaDiffusion, LinearModelGivesExactIntensity) {
  const auto sc = linear_ou(-0.8, 0.2, 1.0, 1.0, 5.0);
  const auto h = constant_history(0.0, 2.0, 200, -0.8);
  for (int M : {0, 2, 4, 6}) {
    const auto B = vada_diffusion(sc, M, h);
    EXPECT_TRUE(B.x_independent());
    for (double x : {-1.0, 0.4}) EXPECT_NEAR(B(x, 2.0), d_eff_linear(sc, 2.0), 1e-10 * d_eff_linear(sc, 2.0));
  }
}

TEST(VadaDiffusion, OddOrderNeedsOverride) {
  const auto sc = bistable_scenario(1.0, 1.0);
  EXPECT_THROW(vada_diffusion(sc, 3, {1, 1, 1, 1}, {1.0}), ConfigurationError);
  EXPECT_NO_THROW(vada_diffusion(sc, 3, {1, 1, 1, 1}, {1.0}, true));
}

TEST(VadaDiffusion, EvenOrderFiniteEverywhere) {
  const auto sc = bistable_scenario(5.0, 5.0);
  const auto B = vada_diffusion(sc, 4, {0.5, 0.8, 1.0, 1.2, 1.5}, {3.5});
  for (double x : linspace(-4.0, 4.0, 801)) EXPECT_TRUE(std::isfinite(B(x, 0.0)));
}

// ---- white noise -----------------------------------------------------------

TEST(WhiteNoiseDiffusion, Examples) {
  EXPECT_DOUBLE_EQ(white_noise_diffusion(white_linear(-1.0, 1.0, 1.0, 2.0))(0.3, 1.0), 1.0);
  const auto sc = white_linear(-1.0, 0.5, 2.0, 2.0);
  EXPECT_NEAR(white_noise_diffusion(sc)(0.0, 1.0), d_eff_linear(sc, 1.0), 1e-15);
  EXPECT_EQ(white_noise_diffusion(white_linear(-1.0, 1.0, 0.0, 2.0))(0.0, 1.0), 0.0);
  EXPECT_THROW(white_noise_diffusion(linear_ou(-1.0, 1.0, 1.0, 1.0, 2.0)), UsageError);
}

TEST(Drift, ZeroMeanIsRestoringTerm) {
  const auto sc = bistable_scenario(1.0, 1.0);
  const DriftCoefficient q(sc);
  for (double x : {-1.0, 0.3, 2.0}) EXPECT_DOUBLE_EQ(q(x, 0.5), sc.model.h(x));
  const auto lin = genfpk::testing::linear_benchmark();
  EXPECT_DOUBLE_EQ(DriftCoefficient(lin)(0.0, 1.0), 0.2 * 0.2);
}
