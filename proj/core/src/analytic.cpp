#include "genfpk/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "genfpk/errors.hpp"
#include "genfpk/quadrature.hpp"

namespace genfpk {
namespace {

void require_linear(const Scenario& sc, const char* who) {
  if (!sc.model.is_linear()) throw UsageError(std::string(who) + ": model is not linear");
}

int panels_for(double T, double rate) {
  return std::max(64, static_cast<int>(std::ceil(T * std::max(rate, 1.0) * 16.0)));
}

}  // namespace

GaussianMoments linear_moments(const Scenario& sc, double t, const QuadratureOptions& opts) {
  require_linear(sc, "linear_moments");
  const double t0 = sc.model.t0();
  const double T = t - t0;
  const double eta1 = sc.model.eta(1);
  const double k = sc.model.kappa();
  if (T <= 0.0) return {sc.init.mean, sc.init.variance};

  double rate = std::abs(eta1);
  if (const auto* ou = sc.noise.ou()) rate = std::max(rate, ou->rate());
  const int panels = panels_for(T, rate);

  double mean = sc.init.mean * std::exp(eta1 * T);
  if (sc.noise.mean_fn)
    mean += k * integrate([&](double s) { return sc.noise.mean(s) * std::exp(eta1 * (t - s)); }, t0, t,
                          panels, 8);
  else
    mean += k * sc.noise.mean_value * exp_moment(eta1, 0, T);

  const double var =
      sc.init.variance * std::exp(2.0 * eta1 * T) +
      2.0 * integrate([&](double s) { return d_eff_linear(sc, s, opts) * std::exp(2.0 * eta1 * (t - s)); },
                      t0, t, panels, 8);
  return {mean, var};
}

GaussianMoments linear_moments_rk4(const Scenario& sc, double t, int steps, const QuadratureOptions& opts) {
  require_linear(sc, "linear_moments_rk4");
  if (steps < 1) throw ParameterError("linear_moments_rk4: steps must be >= 1");
  const double eta1 = sc.model.eta(1);
  const double k = sc.model.kappa();
  const double t0 = sc.model.t0();
  const double h = (t - t0) / steps;
  auto rhs = [&](double s, double m, double v) {
    return std::pair{eta1 * m + k * sc.noise.mean(s), 2.0 * eta1 * v + 2.0 * d_eff_linear(sc, s, opts)};
  };
  double m = sc.init.mean, v = sc.init.variance, s = t0;
  for (int i = 0; i < steps; ++i) {
    const auto [m1, v1] = rhs(s, m, v);
    const auto [m2, v2] = rhs(s + 0.5 * h, m + 0.5 * h * m1, v + 0.5 * h * v1);
    const auto [m3, v3] = rhs(s + 0.5 * h, m + 0.5 * h * m2, v + 0.5 * h * v2);
    const auto [m4, v4] = rhs(s + h, m + h * m3, v + h * v3);
    m += h / 6.0 * (m1 + 2.0 * m2 + 2.0 * m3 + m4);
    v += h / 6.0 * (v1 + 2.0 * v2 + 2.0 * v3 + v4);
    s = t0 + (i + 1) * h;
  }
  return {m, v};
}

double linear_stationary_variance(const Scenario& sc) {
  require_linear(sc, "linear_stationary_variance");
  const double eta1 = sc.model.eta(1);
  if (!(eta1 < 0.0)) throw UsageError("linear_stationary_variance: requires eta1 < 0");
  const double k = sc.model.kappa();
  double d_inf = 0.0;
  if (const auto* ou = sc.noise.ou())
    d_inf = k * k * ou->zero_lag() / (ou->rate() - eta1);
  else if (const auto* w = std::get_if<WhiteNoiseKernel>(&sc.noise.kernel); w && !w->intensity)
    d_inf = k * k * w->constant;
  else
    throw UsageError("linear_stationary_variance: needs an OU or constant white-noise kernel");
  return d_inf / (-eta1);
}

double gaussian_pdf(double mean, double variance, double x) {
  if (!(variance > 0.0)) throw ParameterError("gaussian_pdf: variance must be positive");
  const double z = x - mean;
  return std::exp(-0.5 * z * z / variance) / std::sqrt(2.0 * std::numbers::pi * variance);
}

double trapezoid(const std::vector<double>& grid, const std::vector<double>& values) {
  if (grid.size() != values.size()) throw UsageError("trapezoid: size mismatch");
  double s = 0.0;
  for (std::size_t i = 1; i < grid.size(); ++i)
    s += 0.5 * (grid[i] - grid[i - 1]) * (values[i] + values[i - 1]);
  return s;
}

std::vector<double> linspace(double a, double b, int n) {
  if (n < 2) throw ParameterError("linspace: need at least 2 points");
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = a + (b - a) * i / (n - 1);
  out.back() = b;
  return out;
}

std::vector<double> stationary_pdf(const ModelSpec& model, const std::function<double(double)>& B_st,
                                   const std::vector<double>& grid) {
  if (grid.empty()) throw UsageError("stationary_pdf: empty grid");
  return stationary_pdf(model, B_st, grid, grid.front());
}

std::vector<double> stationary_pdf(const ModelSpec& model, const std::function<double(double)>& B_st,
                                   const std::vector<double>& grid, double x_ref) {
  if (grid.size() < 2) throw UsageError("stationary_pdf: need at least 2 grid points");
  const GaussRule& rule = gauss_legendre(8);
  auto ratio = [&](double u) {
    const double b = B_st(u);
    if (!(b > 0.0)) throw DomainError("stationary_pdf: diffusion not positive at x=" + std::to_string(u));
    return model.h(u) / b;
  };
  auto segment = [&](double a, double b) {
    double s = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q)
      s += rule.weights[q] * ratio(0.5 * (a + b) + 0.5 * (b - a) * rule.nodes[q]);
    return 0.5 * (b - a) * s;
  };
  std::vector<double> expo(grid.size());
  expo[0] = segment(x_ref, grid[0]);
  for (std::size_t i = 1; i < grid.size(); ++i) expo[i] = expo[i - 1] + segment(grid[i - 1], grid[i]);
  const double peak = *std::max_element(expo.begin(), expo.end());
  std::vector<double> f(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double b = B_st(grid[i]);
    if (!(b > 0.0)) throw DomainError("stationary_pdf: diffusion not positive at x=" + std::to_string(grid[i]));
    f[i] = std::exp(expo[i] - peak) / b;
  }
  const double z = trapezoid(grid, f);
  for (double& v : f) v /= z;
  return f;
}

}  // namespace genfpk
