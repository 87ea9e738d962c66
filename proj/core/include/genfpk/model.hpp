#pragma once

#include <functional>
#include <string>
#include <variant>
#include <vector>

namespace genfpk {

/// One term eta_k * x^k of the restoring function h.
struct Monomial {
  int degree;
  double coeff;
};

/// Scalar random differential equation dX/dt = h(X) + kappa * Xi(t) with
/// polynomial restoring term h(x) = sum_k eta_k x^k.
class ModelSpec {
 public:
  /// Degrees must be distinct and >= 1, and degree 1 must be present.
  ModelSpec(std::vector<Monomial> terms, double kappa, double t0, double t_end);

  const std::vector<Monomial>& terms() const noexcept { return terms_; }
  double kappa() const noexcept { return kappa_; }
  double t0() const noexcept { return t0_; }
  double t_end() const noexcept { return t_end_; }

  /// Coefficient of x^k, 0 when the degree is absent.
  double eta(int degree) const noexcept;
  bool is_linear() const noexcept;
  /// Degrees k >= 2 in ascending order; these index the VADA fluctuation terms.
  std::vector<int> nonlinear_degrees() const;

  double h(double x) const noexcept;
  double h_prime(double x) const noexcept;
  double h_second(double x) const noexcept;

 private:
  std::vector<Monomial> terms_;
  double kappa_;
  double t0_;
  double t_end_;
};

double h_eval(const ModelSpec& model, double x);
double h_prime_eval(const ModelSpec& model, double x);

enum class OuConvention {
  plain,   ///< (D / tau) exp(-|t - s| / tau)
  scaled,  ///< (D / tau) exp(-2 |t - s| / tau), the dimensionless bistable form
};

/// Stationary Ornstein-Uhlenbeck autocovariance.
struct OuKernel {
  double D;
  double tau;
  OuConvention convention = OuConvention::plain;

  /// Decay rate lambda in C(u) = (D / tau) exp(-lambda u).
  double rate() const;
  double zero_lag() const { return D / tau; }
  double operator()(double t, double s) const;
};

/// Delta-correlated excitation 2 D(t) delta(t - s). Only the white-noise
/// limit consumes it.
struct WhiteNoiseKernel {
  std::function<double(double)> intensity;
  /// Set when intensity is a constant; used for serialization.
  double constant = 0.0;
};

/// Arbitrary continuous symmetric kernel supplied as a callable.
struct CustomKernel {
  std::function<double(double, double)> fn;
  /// Time scale over which the kernel varies; drives quadrature panel widths.
  double memory_time = 1.0;
};

using Kernel = std::variant<OuKernel, WhiteNoiseKernel, CustomKernel>;

double ou_kernel(double D, double tau, OuConvention convention, double t, double s);

/// Cross-covariance t -> C_{X0 Xi}(t) between the initial value and the
/// excitation.
struct CrossCovariance {
  enum class Kind { zero, exp, custom };
  Kind kind = Kind::zero;
  double amplitude = 0.0;  ///< exp kind: amplitude * exp(-(t - t0) / tau)
  double tau = 1.0;
  std::function<double(double)> fn;  ///< custom kind

  double operator()(double t, double t0) const;
  bool is_zero() const noexcept { return kind == Kind::zero; }
};

struct NoiseSpec {
  Kernel kernel;
  /// Constant mean of the excitation; ignored when `mean_fn` is set.
  double mean_value = 0.0;
  std::function<double(double)> mean_fn;
  CrossCovariance cross_cov;

  double mean(double t) const { return mean_fn ? mean_fn(t) : mean_value; }
  double covariance(double t, double s) const;
  bool is_white() const noexcept { return std::holds_alternative<WhiteNoiseKernel>(kernel); }
  const OuKernel* ou() const noexcept { return std::get_if<OuKernel>(&kernel); }
};

struct InitialSpec {
  double mean;
  double variance;

  InitialSpec(double mean, double variance);
  double stddev() const;
  double density(double x) const;
};

struct Scenario {
  ModelSpec model;
  NoiseSpec noise;
  InitialSpec init;
  std::string label;

  Scenario(ModelSpec model, NoiseSpec noise, InitialSpec init, std::string label = {});
};

/// Physical bistable parameters mapped onto the dimensionless form
/// dX/dt = X - X^3 + Xi with scaled-OU excitation.
struct BistableScaling {
  double D;    ///< dimensionless intensity 2 kappa^2 D_OU |eta3| / eta1^2
  double tau;  ///< relative correlation time 2 eta1 tau_cor
  double time_scale;   ///< t_dimless = time_scale * t
  double state_scale;  ///< x_dimless = state_scale * x
};

BistableScaling bistable_scaling(double eta1, double eta3, double kappa, double D_ou,
                                 double tau_cor);

/// Dimensionless bistable scenario. The initial condition and horizon are
/// given in physical units and rescaled.
Scenario nondimensionalize_bistable(double eta1, double eta3, double kappa, double D_ou,
                                    double tau_cor, InitialSpec init = {0.0, 0.36},
                                    double t0 = 0.0, double t_end = 10.0);

/// Dimensionless bistable scenario directly from (D, tau).
Scenario bistable_scenario(double D, double tau, double init_sigma = 0.6, double t_end = 10.0);

}  // namespace genfpk
