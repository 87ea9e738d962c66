#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "support.hpp"

using namespace genfpk;
using genfpk::testing::linear_benchmark;

namespace {

SolveConfig quick(Method method, double a, double b, int K = 30) {
  SolveConfig cfg;
  cfg.method = method;
  cfg.domain = std::make_pair(a, b);
  cfg.K = K;
  cfg.backend = LinearBackend::banded;
  cfg.energy_diagnostics = false;
  return cfg;
}

double max_gap(const SolveResult& a, const SolveResult& b, const std::vector<double>& grid) {
  double worst = 0.0;
  EXPECT_EQ(a.snapshots.size(), b.snapshots.size());
  for (std::size_t i = 0; i < std::min(a.snapshots.size(), b.snapshots.size()); ++i) {
    const auto fa = pdf_eval(a.field(i), grid), fb = pdf_eval(b.field(i), grid);
    for (std::size_t k = 0; k < grid.size(); ++k) worst = std::max(worst, std::abs(fa[k] - fb[k]));
  }
  return worst;
}

PdfField gaussian_field(double a, double b, double mean, double var) {
  auto space = std::make_shared<const PufemSpace>(build_cover(a, b, 60), 2, 4);
  const Eigen::MatrixXd C = assemble_mass(*space);
  return {space, fit_initial(*space, C, [&](double x) { return gaussian_pdf(mean, var, x); }), 0.0};
}

}  // namespace

TEST(Method, NamesRoundTrip) {
  for (auto m : {Method::exact_linear, Method::white_noise, Method::sct, Method::fox, Method::hanggi, Method::vada})
    EXPECT_EQ(parse_method(to_string(m)), m);
  EXPECT_EQ(parse_method("han"), Method::hanggi);
  EXPECT_EQ(parse_method("linear"), Method::exact_linear);
  EXPECT_THROW(parse_method("bogus"), UsageError);
}

TEST(SolveConfig, Validation) {
  SolveConfig cfg;
  cfg.method = Method::vada;
  cfg.vada_order = 3;
  EXPECT_THROW(cfg.validate(), ConfigurationError);
  cfg.allow_odd = true;
  EXPECT_NO_THROW(cfg.validate());
  cfg = {};
  cfg.eps_tol = 0.0;
  EXPECT_THROW(cfg.validate(), ParameterError);
  cfg = {};
  cfg.dt = -1.0;
  EXPECT_THROW(cfg.validate(), ParameterError);
}

TEST(SolveConfig, OddVadaRejectedBySolver) {
  auto cfg = quick(Method::vada, -2.6, 2.6, 10);
  cfg.vada_order = 3;
  auto sc = bistable_scenario(1.0, 1.0, 0.6, 0.05);
  EXPECT_THROW(solve(sc, cfg), ConfigurationError);
  cfg.allow_odd = true;
  EXPECT_NO_THROW(solve(sc, cfg));
}

TEST(MomentHistory, TrapezoidPrefix) {
  MomentHistory h({3});
  h.append(0.0, 1.0, {0.0});
  h.append(0.1, 3.0, {0.0});
  h.append(0.3, -1.0, {0.0});
  EXPECT_NEAR(h.prefix(1), 0.1 * 2.0, 1e-15);
  EXPECT_NEAR(h.prefix(2) - h.prefix(1), 0.2 * 1.0, 1e-15);
  h.replace_last(5.0, {0.0});
  EXPECT_NEAR(h.prefix(2) - h.prefix(1), 0.2 * 4.0, 1e-15);
  EXPECT_THROW(h.append(0.3, 0.0, {0.0}), UsageError);
  EXPECT_THROW(h.append(0.4, 0.0, {}), UsageError);
  EXPECT_NEAR(h.prefix_at(0.1), h.prefix(1), 1e-15);
}

TEST(ComputeMoments, StandardGaussian) {
  const ModelSpec bistable({{1, 1.0}, {3, -1.0}}, 1.0, 0.0, 1.0);
  const auto f = gaussian_field(-9.0, 9.0, 0.0, 1.0);
  const auto m = compute_moments(f, bistable);
  ASSERT_EQ(m.r_gk.size(), 1u);
  EXPECT_NEAR(m.r_gk[0], 3.0, 1e-4);
  EXPECT_NEAR(m.r_hprime, -2.0, 1e-4);
  const ModelSpec quad({{1, -1.0}, {2, 0.4}}, 1.0, 0.0, 1.0);
  EXPECT_NEAR(compute_moments(f, quad).r_gk[0], 0.0, 1e-12);
}

TEST(ComputeMoments, MassDriftIsHardError) {
  auto f = gaussian_field(-9.0, 9.0, 0.0, 1.0);
  f.weights *= 1.05;
  EXPECT_THROW(compute_moments(f, ModelSpec({{1, 1.0}, {3, -1.0}}, 1.0, 0.0, 1.0)), DivergenceError);
}

TEST(RunLocal, MethodModelCompatibility) {
  EXPECT_THROW(run_local(bistable_scenario(1.0, 1.0), quick(Method::exact_linear, -2, 2)), UsageError);
  EXPECT_THROW(run_local(linear_benchmark(), quick(Method::white_noise, -2, 2)), UsageError);
  EXPECT_THROW(run_local(linear_benchmark(), quick(Method::vada, -2, 2)), UsageError);
  EXPECT_THROW(run_vada(linear_benchmark(), quick(Method::fox, -2, 2)), UsageError);
}

TEST(Collapse, FoxAndVadaMatchExactLinear) {
  const auto sc = linear_benchmark(3.0);
  auto cfg = quick(Method::exact_linear, -1.6, 1.05, 50);
  const auto exact = solve(sc, cfg);
  const auto grid = linspace(-1.6, 1.05, 531);
  cfg.method = Method::fox;
  EXPECT_LE(max_gap(exact, solve(sc, cfg), grid), 1e-6);
  cfg.method = Method::vada;
  for (int M : {2, 4}) {
    cfg.vada_order = M;
    const auto v = solve(sc, cfg);
    EXPECT_LE(max_gap(exact, v, grid), 1e-6);
    for (std::size_t i = 0; i < v.history.size(); ++i) EXPECT_EQ(v.history.r_hprime(i), -0.8);
  }
}

TEST(WhiteNoise, LinearMatchesGaussian) {
  const auto sc = genfpk::testing::white_linear(-1.0, 1.0, 0.5, 3.0);
  const auto r = solve(sc, quick(Method::white_noise, -3.5, 3.5, 40));
  const auto grid = linspace(-3.5, 3.5, 141);
  // Variance obeys s' = 2 (eta1 s + D): s(t) = D + (s0 - D) e^{-2t}.
  for (std::size_t i = 0; i < r.snapshots.size(); i += 10) {
    const double t = r.snapshots[i].t;
    const double var = 0.5 + (0.25 - 0.5) * std::exp(-2.0 * t);
    const auto f = pdf_eval(r.field(i), grid);
    for (std::size_t k = 0; k < grid.size(); ++k) EXPECT_NEAR(f[k], gaussian_pdf(0.0, var, grid[k]), 5e-3);
  }
}

TEST(Vada, OrderZeroIsHanggi) {
  const auto sc = bistable_scenario(1.0, 1.0, 0.6, 0.5);
  auto cfg = quick(Method::hanggi, -2.6, 2.6, 20);
  const auto h = solve(sc, cfg);
  cfg.method = Method::vada;
  cfg.vada_order = 0;
  const auto v = solve(sc, cfg);
  ASSERT_EQ(h.snapshots.size(), v.snapshots.size());
  for (std::size_t i = 0; i < h.snapshots.size(); ++i) EXPECT_EQ(h.snapshots[i].weights, v.snapshots[i].weights);
}

TEST(Vada, FewIterationsPerStep) {
  const auto sc = bistable_scenario(1.0, 0.1, 0.6, 3.0);
  auto cfg = quick(Method::vada, -2.6, 2.6, 50);
  const auto r = solve(sc, cfg);
  EXPECT_LE(r.mean_iterations, 2.0);
  EXPECT_GE(r.mean_iterations, 1.0);
}

TEST(Vada, NonConvergenceIsStepFailure) {
  const auto sc = bistable_scenario(1.0, 1.0, 0.6, 0.5);
  auto cfg = quick(Method::vada, -2.6, 2.6, 20);
  cfg.max_iters = 1;
  cfg.eps_tol = 1e-15;
  EXPECT_THROW(solve(sc, cfg), StepFailure);
}

TEST(Vada, SecondOrderInTime) {
  const auto sc = bistable_scenario(1.0, 1.0, 0.6, 1.0);
  const auto grid = linspace(-2.6, 2.6, 261);
  auto final_pdf = [&](double dt) {
    auto cfg = quick(Method::vada, -2.6, 2.6, 20);
    cfg.dt = dt;
    cfg.eps_tol = 1e-12;
    return pdf_eval(solve(sc, cfg).final_field(), grid);
  };
  const auto a = final_pdf(0.02), b = final_pdf(0.01), c = final_pdf(0.005);
  double e1 = 0.0, e2 = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    e1 = std::max(e1, std::abs(a[i] - b[i]));
    e2 = std::max(e2, std::abs(b[i] - c[i]));
  }
  EXPECT_GT(e1 / e2, 3.0);
  EXPECT_LT(e1 / e2, 5.0);
}

TEST(Sct, NegativityReportedAtTau03) {
  // Short horizon: the events are recorded before backward diffusion blows up.
  const auto sc = bistable_scenario(1.0, 0.3, 0.6, 0.1);
  auto cfg = quick(Method::sct, -3.0, 3.0, 30);
  const auto r = solve(sc, cfg);
  ASSERT_FALSE(r.sct_events.empty());
  EXPECT_LE(r.sct_events.front().value, 0.0);
  cfg.abort_on_sct_negative = true;
  EXPECT_THROW(solve(sc, cfg), StepFailure);
}

TEST(Sct, BlowUpNamesNegativity) {
  const auto sc = bistable_scenario(1.0, 0.3, 0.6, 2.0);
  try {
    solve(sc, quick(Method::sct, -3.0, 3.0, 30));
    FAIL() << "expected divergence";
  } catch (const DivergenceError& e) {
    EXPECT_NE(std::string(e.what()).find("SCT diffusion negative"), std::string::npos);
  }
}

TEST(Hanggi, StationaryPeaksAtUnity) {
  const auto sc = bistable_scenario(1.0, 1.0, 0.6, 10.0);
  const auto r = solve(sc, quick(Method::hanggi, -2.6, 2.6, 50));
  const auto grid = linspace(-2.6, 2.6, 521);
  const double dx = grid[1] - grid[0];
  const auto peaks = find_peaks(grid, pdf_eval(r.final_field(), grid));
  ASSERT_EQ(peaks.size(), 2u);
  for (const auto& p : peaks) EXPECT_NEAR(std::abs(p.first), 1.0, dx);
}

TEST(Stationarity, StationaryStartDetectedAtOnce) {
  // White noise with the stationary variance: the Gaussian is a fixed point.
  NoiseSpec noise;
  noise.kernel = WhiteNoiseKernel{nullptr, 0.5};
  const Scenario sc(ModelSpec({{1, -1.0}}, 1.0, 0.0, 3.0), noise, InitialSpec(0.0, 0.5));
  const auto r = solve(sc, quick(Method::white_noise, -4.5, 4.5, 40));
  const auto s = detect_stationarity(r, 1.0, 1e-3);
  EXPECT_TRUE(s.stationary);
  EXPECT_NEAR(s.t, 0.0, 1e-12);
}

TEST(Stationarity, BistableTransientConfirmed) {
  const auto sc = bistable_scenario(1.0, 0.5, 0.6, 20.0);
  const auto r = solve(sc, quick(Method::vada, -2.6, 2.6, 40));
  const auto s = detect_stationarity(r, 2.0, 1e-3);
  EXPECT_TRUE(s.stationary);
  EXPECT_GT(s.t, 0.5) << s.t;
  EXPECT_TRUE(s.confirmed) << s.t;
}

TEST(Stationarity, DriftingRunNotStationary) {
  SolveResult r;
  for (int i = 0; i < 50; ++i) r.snapshots.push_back({0.1 * i, Eigen::VectorXd(), 0.1 * std::exp(0.2 * i), 1.0 + i});
  EXPECT_FALSE(detect_stationarity(r, 1.0, 1e-3).stationary);
}

TEST(Marcher, DivergenceCapReported) {
  const auto sc = bistable_scenario(5.0, 5.0, 0.6, 1.0);
  auto cfg = quick(Method::sct, -3.5, 3.5, 30);
  EXPECT_THROW(solve(sc, cfg), DivergenceError);
}

TEST(Marcher, BoundaryPolicy) {
  const auto sc = linear_benchmark(1.0);
  auto cfg = quick(Method::exact_linear, -1.0, 0.0, 20);
  cfg.boundary = BoundaryPolicy::warn;
  const auto r = solve(sc, cfg);
  EXPECT_FALSE(r.warnings.empty());
  cfg.boundary = BoundaryPolicy::abort;
  EXPECT_THROW(solve(sc, cfg), StepFailure);
}

TEST(Defaults, DomainAndStep) {
  EXPECT_DOUBLE_EQ(default_dt(linear_benchmark().model), 1.0 / (2.0 * 0.8) / 200.0);
  const auto d = default_domain(linear_benchmark());
  EXPECT_LT(d.first, -0.7 - 6 * 0.15 + 1e-9);
  EXPECT_GT(d.second, 0.0);
  const auto b = default_domain(bistable_scenario(1.0, 0.1));
  EXPECT_LT(b.first, -2.0);
  EXPECT_GT(b.second, 2.0);
}
