#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "genfpk/history.hpp"
#include "genfpk/model.hpp"

namespace genfpk {

/// Drift q(x, t) = h(x) + kappa * m_Xi(t).
class DriftCoefficient {
 public:
  explicit DriftCoefficient(const Scenario& scenario);

  double operator()(double x, double t) const;
  /// Time-only part kappa * m_Xi(t); the x part is h(x).
  double shift(double t) const;
  const ModelSpec& model() const noexcept { return model_; }

 private:
  ModelSpec model_;
  NoiseSpec noise_;
};

enum class DiffusionKind { linear, white_noise, sct, fox, vada };

std::string to_string(DiffusionKind kind);

/// Diffusion coefficient frozen at one time level.
struct DiffusionProfile {
  std::function<double(double)> value;
  std::function<double(double)> dx;
};

/// B(x, t) of a genFPK equation with its x-derivative. Profiles are produced
/// per time level so that time integrals are evaluated once and reused for
/// every spatial quadrature node.
class DiffusionCoefficient {
 public:
  using Factory = std::function<DiffusionProfile(double t)>;

  DiffusionCoefficient(DiffusionKind kind, Factory factory, bool x_independent, int order = 0);

  DiffusionKind kind() const noexcept { return kind_; }
  bool x_independent() const noexcept { return x_independent_; }
  /// VADA truncation order; 0 for the other kinds.
  int order() const noexcept { return order_; }

  DiffusionProfile at(double t) const { return factory_(t); }
  double operator()(double x, double t) const { return at(t).value(x); }
  double dx(double x, double t) const { return at(t).dx(x); }

 private:
  DiffusionKind kind_;
  Factory factory_;
  bool x_independent_;
  int order_;
};

/// Controls the generic composite Gauss-Legendre route for kernel integrals.
struct QuadratureOptions {
  int order = 4;
  /// Panels per characteristic time (kernel memory or exponential scale).
  double panels_per_scale = 8.0;
  int min_panels = 16;
  int max_panels = 200000;
  /// Use exact exponential-moment formulas for OU kernels.
  bool closed_form = true;
};

/// E_n(b, T) = int_0^T exp(b u) u^n du, evaluated without cancellation.
double exp_moment(double b, int n, double T);

/// int_{t0}^{t} C(t, s) exp(a (t - s)) (t - s)^n ds. White-noise kernels use
/// the half-mass rule: the delta contributes D(t) when n = 0 and nothing
/// otherwise.
double kernel_moment(const NoiseSpec& noise, double t0, double t, double a, int n,
                     const QuadratureOptions& opts = {});

double d_eff_linear(const Scenario& scenario, double t, const QuadratureOptions& opts = {});
double sct_dn(const Scenario& scenario, double t, int n, const QuadratureOptions& opts = {});

DiffusionCoefficient linear_diffusion(const Scenario& scenario, const QuadratureOptions& opts = {});
DiffusionCoefficient white_noise_diffusion(const Scenario& scenario);
DiffusionCoefficient sct_diffusion(const Scenario& scenario, const QuadratureOptions& opts = {});
DiffusionCoefficient fox_diffusion(const Scenario& scenario, const QuadratureOptions& opts = {});

struct SctValidity {
  bool valid = true;
  double x = 0.0;      ///< first grid point with B <= 0
  double value = 0.0;  ///< B at that point, or the minimum when valid
};

SctValidity check_sct_validity(const DiffusionCoefficient& diff, const std::vector<double>& grid,
                               double t);

/// Multi-indices alpha over `slots` components grouped by |alpha| = 0..max_order,
/// each carrying 1 / alpha!.
class MultiIndexTable {
 public:
  struct Entry {
    std::vector<int> alpha;
    double weight;
  };

  MultiIndexTable(int slots, int max_order);

  int slots() const noexcept { return slots_; }
  int max_order() const noexcept { return max_order_; }
  const std::vector<Entry>& order(int m) const { return table_.at(m); }

  /// sum_{|alpha| = m} phi^alpha / alpha!
  double sum(int m, const std::vector<double>& phi) const;

 private:
  int slots_;
  int max_order_;
  std::vector<std::vector<Entry>> table_;
};

/// phi_k = eta_k (k x^{k-1} - R_{g'_k}).
double vada_phi(const ModelSpec& model, int k, double x, double r_gk);

/// exp(int_s^t R_{h'}(u) du) from the prefix integrals of the history.
double vada_exp_factor(const MomentHistory& history, double s, double t);

/// D_m^eff(t) for m = 0..max_order by quadrature over the history cells
/// (order-4 Gauss per cell). The history must end at t.
std::vector<double> vada_dm_eff(const Scenario& scenario, const MomentHistory& history,
                                int max_order);
double vada_dm_eff(const Scenario& scenario, const MomentHistory& history, double t, int m);

/// Incremental D_m^eff for OU kernels. Keeps
/// J_m(t_i) = int_{t0}^{t_i} exp(Q(t_i) - Q(s) - lambda (t_i - s)) (t_i - s)^m ds
/// at the last committed node and advances it by one history cell in O(M^2).
class OuMemory {
 public:
  OuMemory(const Scenario& scenario, int max_order);

  /// D_m^eff at the last node of `history`, whose second-to-last node must be
  /// the committed one.
  std::vector<double> evaluate(const MomentHistory& history) const;
  /// Accepts the last node of `history` as committed.
  void commit(const MomentHistory& history);

 private:
  std::vector<double> advance(const MomentHistory& history) const;

  double kappa_;
  double t0_;
  CrossCovariance cross_;
  int max_order_;
  double lambda_;
  double amplitude_;
  std::vector<double> j_;
  std::size_t committed_ = 0;
};

/// VADA diffusion for given intensities D_0..D_M and moments R_{g'_k}
/// (ordered as model.nonlinear_degrees()). Odd M throws unless allow_odd.
DiffusionCoefficient vada_diffusion(const Scenario& scenario, int M, std::vector<double> dm_eff,
                                    std::vector<double> r_gk, bool allow_odd = false);

/// VADA diffusion at the end of `history`, intensities by quadrature.
DiffusionCoefficient vada_diffusion(const Scenario& scenario, int M, const MomentHistory& history,
                                    bool allow_odd = false);

}  // namespace genfpk
