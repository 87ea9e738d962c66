#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "genfpk/coefficients.hpp"
#include "genfpk/history.hpp"
#include "genfpk/model.hpp"
#include "genfpk/pufem.hpp"

namespace genfpk {

enum class Method { exact_linear, white_noise, sct, fox, hanggi, vada };

std::string to_string(Method method);
/// Accepts the names produced by to_string plus short aliases (linear, han, ...).
Method parse_method(const std::string& name);

enum class BoundaryPolicy { ignore, warn, abort };

struct SolveConfig {
  Method method = Method::exact_linear;
  int vada_order = 2;
  bool allow_odd = false;

  int K = 50;
  int basis = 4;
  int smoothness = 2;
  /// Explicit domain; when absent one is chosen from a moment pre-run.
  std::optional<std::pair<double, double>> domain;

  /// Time step; <= 0 selects tau_rel / 200 with tau_rel = 1 / (2 |eta1|).
  double dt = 0.0;
  double eps_tol = 1e-8;
  int max_iters = 50;
  LinearBackend backend = LinearBackend::dense;
  QuadratureOptions quadrature;

  int snapshot_stride = 10;
  /// Record int f^2 and int f_x^2 at every step (linear energy identity).
  bool energy_diagnostics = true;
  bool abort_on_sct_negative = false;
  BoundaryPolicy boundary = BoundaryPolicy::warn;
  double boundary_ratio = 1e-6;

  double divergence_cap = 1e6;
  double mass_drift_cap = 0.1;

  /// Stop once the first two moments stay within rtol over `window` time.
  bool stop_at_stationarity = false;
  double stationarity_window = 2.0;
  double stationarity_rtol = 1e-3;

  void validate() const;
};

struct Snapshot {
  double t;
  Eigen::VectorXd weights;
  double mean;
  double second_moment;
};

struct StepRecord {
  double t;
  double mass;
  int iterations;
  double residual;
  double energy_i;  ///< int f^2, NaN when not recorded
  double energy_p;  ///< int f_x^2
  double diffusion_scale;  ///< D^eff(t) for linear runs, NaN otherwise
};

struct SctEvent {
  double t;
  double x;
  double value;
};

struct SolveResult {
  std::shared_ptr<const PufemSpace> space;
  Method method = Method::exact_linear;
  int vada_order = 0;
  double dt = 0.0;
  std::vector<Snapshot> snapshots;
  MomentHistory history;
  std::vector<StepRecord> steps;
  std::vector<SctEvent> sct_events;
  std::vector<std::string> warnings;
  double max_mass_drift = 0.0;
  int max_iterations = 0;
  double mean_iterations = 0.0;
  int residual_increases = 0;
  bool stopped_stationary = false;

  PdfField field(std::size_t i) const { return {space, snapshots.at(i).weights, snapshots.at(i).t}; }
  PdfField final_field() const { return field(snapshots.size() - 1); }
};

struct MomentSet {
  double mass;
  double r_hprime;
  std::vector<double> r_gk;  ///< ordered as model.nonlinear_degrees()
};

/// Expectations of h' and g'_k under f normalized by its own mass. Throws
/// DivergenceError when the mass differs from 1 by more than 1e-2.
MomentSet compute_moments(const PdfField& field, const ModelSpec& model);

struct Stationarity {
  bool stationary = false;
  double t = 0.0;
  /// Moments also stayed within rtol over [t, 3 t] when the run covers it.
  bool confirmed = false;
};

Stationarity detect_stationarity(const SolveResult& result, double window, double rtol);

double default_dt(const ModelSpec& model);
std::pair<double, double> default_domain(const Scenario& scenario);

SolveResult run_local(const Scenario& scenario, const SolveConfig& config);
SolveResult run_vada(const Scenario& scenario, const SolveConfig& config);
/// Dispatches on config.method.
SolveResult solve(const Scenario& scenario, const SolveConfig& config);

/// Residual of dI/dt / 2 + eta1 I / 2 + D P = 0 at every interior step of a
/// linear run, relative to the largest of the three terms.
std::vector<double> energy_residuals(const SolveResult& result, const ModelSpec& model);

}  // namespace genfpk
