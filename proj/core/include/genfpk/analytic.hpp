#pragma once

#include <functional>
#include <vector>

#include "genfpk/coefficients.hpp"
#include "genfpk/model.hpp"

namespace genfpk {

struct GaussianMoments {
  double mean;
  double variance;
};

/// Mean and variance of the Gaussian response of a linear model, from the
/// convolution formulas.
GaussianMoments linear_moments(const Scenario& scenario, double t, const QuadratureOptions& opts = {});

/// Same quantities from the moment ODEs dm/dt = eta1 m + kappa m_Xi and
/// d(sigma^2)/dt / 2 = eta1 sigma^2 + D^eff, integrated by classical RK4.
GaussianMoments linear_moments_rk4(const Scenario& scenario, double t, int steps,
                                   const QuadratureOptions& opts = {});

/// Limit t -> infinity of the variance for eta1 < 0 and a stationary kernel:
/// D^eff(infinity) / (-eta1).
double linear_stationary_variance(const Scenario& scenario);

double gaussian_pdf(double mean, double variance, double x);

/// Zero-flux stationary density (B f)' = h f on an increasing grid:
/// f ~ exp(int_{x_ref}^x h / B) / B, normalized by the trapezoid rule.
/// x_ref defaults to the first grid point.
std::vector<double> stationary_pdf(const ModelSpec& model, const std::function<double(double)>& B_st,
                                   const std::vector<double>& grid);
std::vector<double> stationary_pdf(const ModelSpec& model, const std::function<double(double)>& B_st,
                                   const std::vector<double>& grid, double x_ref);

/// Trapezoid rule on an arbitrary increasing grid.
double trapezoid(const std::vector<double>& grid, const std::vector<double>& values);

std::vector<double> linspace(double a, double b, int n);

}  // namespace genfpk
