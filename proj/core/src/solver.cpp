#include "genfpk/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "genfpk/analytic.hpp"
#include "genfpk/errors.hpp"
#include "genfpk/montecarlo.hpp"

namespace genfpk {

std::string to_string(Method method) {
  switch (method) {
    case Method::exact_linear: return "exact_linear";
    case Method::white_noise: return "white_noise";
    case Method::sct: return "sct";
    case Method::fox: return "fox";
    case Method::hanggi: return "hanggi";
    case Method::vada: return "vada";
  }
  return "unknown";
}

Method parse_method(const std::string& name) {
  if (name == "exact_linear" || name == "linear" || name == "exact") return Method::exact_linear;
  if (name == "white_noise" || name == "white" || name == "fpk") return Method::white_noise;
  if (name == "sct") return Method::sct;
  if (name == "fox") return Method::fox;
  if (name == "hanggi" || name == "han") return Method::hanggi;
  if (name == "vada") return Method::vada;
  throw UsageError("unknown method '" + name + "'");
}

void SolveConfig::validate() const {
  if (K < 2) throw ParameterError("K must be >= 2");
  if (basis < 1) throw ParameterError("basis count must be >= 1");
  if (smoothness < 1 || smoothness > 3) throw ParameterError("smoothness must be 1, 2 or 3");
  if (dt < 0.0 || !std::isfinite(dt)) throw ParameterError("dt must be positive (or 0 for the default)");
  if (!(eps_tol > 0.0)) throw ParameterError("eps_tol must be positive");
  if (max_iters < 1) throw ParameterError("max_iters must be >= 1");
  if (snapshot_stride < 1) throw ParameterError("snapshot stride must be >= 1");
  if (domain && !(domain->second > domain->first)) throw ParameterError("domain must be a non-empty interval");
  if (method == Method::vada) {
    if (vada_order < 0) throw ConfigurationError("VADA order must be >= 0");
    if (vada_order % 2 != 0 && !allow_odd)
      throw ConfigurationError("VADA order " + std::to_string(vada_order) +
                               " is odd; odd truncations can make the diffusion negative "
                               "(use allow_odd to override)");
  }
}

double default_dt(const ModelSpec& model) {
  const double eta1 = std::abs(model.eta(1));
  const double tau_rel = eta1 > 0.0 ? 1.0 / (2.0 * eta1) : 0.5;
  return tau_rel / 200.0;
}

std::pair<double, double> default_domain(const Scenario& sc) {
  const double t0 = sc.model.t0();
  const double t1 = sc.model.t_end();
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  if (sc.model.is_linear()) {
    for (int i = 0; i <= 200; ++i) {
      const auto g = linear_moments(sc, t0 + (t1 - t0) * i / 200.0);
      const double s = std::sqrt(g.variance);
      lo = std::min(lo, g.mean - 6.0 * s);
      hi = std::max(hi, g.mean + 6.0 * s);
    }
    return {lo, hi};
  }
  if (!sc.noise.ou())
    throw ConfigurationError("no default domain for nonlinear models without an OU kernel; pass one explicitly");
  std::vector<double> times;
  for (int i = 0; i <= 50; ++i) times.push_back(t0 + (t1 - t0) * i / 50.0);
  const PathEnsemble ens = integrate_paths(sc, default_mc_dt(sc), times, 2000, 12345);
  for (const auto& row : ens.states) {
    double m = 0.0, m2 = 0.0;
    for (double x : row) {
      m += x;
      m2 += x * x;
    }
    m /= row.size();
    const double s = std::sqrt(std::max(m2 / row.size() - m * m, 1e-12));
    lo = std::min(lo, m - 6.0 * s);
    hi = std::max(hi, m + 6.0 * s);
  }
  return {lo, hi};
}

MomentSet compute_moments(const PdfField& field, const ModelSpec& model) {
  const PufemSpace& space = *field.space;
  const std::vector<int> degrees = model.nonlinear_degrees();
  double mass = 0.0, rh = 0.0;
  std::vector<double> rg(degrees.size(), 0.0);
  for (int c = 0; c < space.cells(); ++c) {
    const auto& cell = space.cell(c);
    for (std::size_t q = 0; q < cell.x.size(); ++q) {
      double f = 0.0;
      for (std::size_t l = 0; l < cell.dofs.size(); ++l) f += field.weights[cell.dofs[l]] * cell.val(q, l);
      const double wf = cell.w[q] * f;
      const double x = cell.x[q];
      mass += wf;
      rh += wf * model.h_prime(x);
      for (std::size_t i = 0; i < degrees.size(); ++i)
        rg[i] += wf * degrees[i] * std::pow(x, degrees[i] - 1);
    }
  }
  if (!(std::abs(mass - 1.0) <= 1e-2))
    throw DivergenceError("normalization drift " + std::to_string(mass - 1.0) + " makes moments meaningless",
                          field.t, 0.0);
  MomentSet out{mass, model.is_linear() ? model.eta(1) : rh / mass, {}};
  for (double& v : rg) v /= mass;
  out.r_gk = std::move(rg);
  return out;
}

Stationarity detect_stationarity(const SolveResult& result, double window, double rtol) {
  const auto& snaps = result.snapshots;
  Stationarity out;
  if (snaps.size() < 3 || !(window > 0.0)) return out;
  const double t_last = snaps.back().t;
  auto within = [&](const Snapshot& a, const Snapshot& b) {
    const double scale = std::sqrt(std::max(a.second_moment, 1e-300));
    return std::abs(a.mean - b.mean) <= rtol * scale &&
           std::abs(a.second_moment - b.second_moment) <= rtol * std::abs(a.second_moment);
  };
  for (std::size_t i = 0; i < snaps.size(); ++i) {
    if (snaps[i].t + window > t_last + 1e-12) break;
    bool ok = true;
    for (std::size_t j = i + 1; j < snaps.size() && snaps[j].t <= snaps[i].t + window + 1e-12; ++j)
      if (!within(snaps[i], snaps[j])) {
        ok = false;
        break;
      }
    if (!ok) continue;
    out.stationary = true;
    out.t = snaps[i].t;
    const double t0 = result.history.empty() ? snaps.front().t : result.history.front_time();
    const double confirm_end = out.t + 2.0 * (out.t - t0);
    if (confirm_end <= t_last + 1e-12) {
      out.confirmed = true;
      for (std::size_t j = i + 1; j < snaps.size() && snaps[j].t <= confirm_end + 1e-12; ++j)
        if (!within(snaps[i], snaps[j])) {
          out.confirmed = false;
          break;
        }
    }
    return out;
  }
  return out;
}

namespace {

// Shared time-marching state for both drivers.
struct Marcher {
  const Scenario& sc;
  const SolveConfig& cfg;
  SolveResult result;
  Eigen::MatrixXd mass;
  Eigen::MatrixXd stiffness;
  Eigen::VectorXd shape_integrals;
  DriftCoefficient drift;
  double dt = 0.0;
  int steps = 0;
  bool boundary_warned = false;

  Marcher(const Scenario& scenario, const SolveConfig& config) : sc(scenario), cfg(config), drift(scenario) {
    cfg.validate();
    const auto [lo, hi] = cfg.domain ? *cfg.domain : default_domain(sc);
    result.space = std::make_shared<const PufemSpace>(build_cover(lo, hi, cfg.K), cfg.smoothness, cfg.basis);
    mass = assemble_mass(*result.space);
    if (cfg.energy_diagnostics) stiffness = assemble_stiffness(*result.space);
    const PufemSpace& space = *result.space;
    shape_integrals = Eigen::VectorXd::Zero(space.dof());
    for (int c = 0; c < space.cells(); ++c) {
      const auto& cell = space.cell(c);
      for (std::size_t q = 0; q < cell.x.size(); ++q)
        for (std::size_t l = 0; l < cell.dofs.size(); ++l)
          shape_integrals[cell.dofs[l]] += cell.w[q] * cell.val(q, l);
    }
    const double span = sc.model.t_end() - sc.model.t0();
    const double dt0 = cfg.dt > 0.0 ? cfg.dt : default_dt(sc.model);
    steps = std::max(1, static_cast<int>(std::ceil(span / dt0 - 1e-9)));
    dt = span / steps;
    result.dt = dt;
    result.method = cfg.method;
  }

  double time(int i) const { return sc.model.t0() + i * dt; }

  Eigen::VectorXd initial_weights() const {
    return fit_initial(*result.space, mass, [this](double x) { return sc.init.density(x); });
  }

  double max_abs_f(const Eigen::VectorXd& w) const {
    const PufemSpace& space = *result.space;
    double peak = 0.0;
    for (int c = 0; c < space.cells(); ++c) {
      const auto& cell = space.cell(c);
      Eigen::VectorXd local(cell.dofs.size());
      for (std::size_t l = 0; l < cell.dofs.size(); ++l) local[l] = w[cell.dofs[l]];
      peak = std::max(peak, (cell.val * local).cwiseAbs().maxCoeff());
    }
    return peak;
  }

  // Guards against blow-up and records per-step diagnostics.
  void record(int i, const Eigen::VectorXd& w, int iterations, double residual, const DiffusionProfile& profile,
              bool x_independent) {
    const double t = time(i);
    if (!w.allFinite()) throw DivergenceError("non-finite weights", t, dt);
    const double m = shape_integrals.dot(w);
    const double drift_mass = std::abs(m - 1.0);
    result.max_mass_drift = std::max(result.max_mass_drift, drift_mass);
    const double peak = max_abs_f(w);
    // Backward diffusion is the usual cause of blow-up for SCT; say so.
    const std::string cause =
        result.sct_events.empty()
            ? std::string()
            : "; SCT diffusion negative since t=" + std::to_string(result.sct_events.front().t) +
                  " at x=" + std::to_string(result.sct_events.front().x);
    if (peak > cfg.divergence_cap)
      throw DivergenceError("pdf magnitude " + std::to_string(peak) + " exceeds the divergence cap" + cause, t, dt);
    if (drift_mass > cfg.mass_drift_cap)
      throw DivergenceError("normalization drift " + std::to_string(drift_mass) + " exceeds the cap" + cause, t, dt);
    if (cfg.boundary != BoundaryPolicy::ignore) {
      const PdfField f{result.space, w, t};
      const auto& cover = result.space->cover();
      const double edge = std::max(std::abs(pdf_eval(f, cover.omega_min)), std::abs(pdf_eval(f, cover.omega_max)));
      if (edge > cfg.boundary_ratio * peak) {
        const std::string msg = "pdf at the domain boundary is " + std::to_string(edge / peak) +
                                " of its peak at t=" + std::to_string(t);
        if (cfg.boundary == BoundaryPolicy::abort) throw StepFailure(msg, t, dt);
        if (!boundary_warned) result.warnings.push_back(msg);
        boundary_warned = true;
      }
    }
    StepRecord rec{t, m, iterations, residual, std::numeric_limits<double>::quiet_NaN(),
                   std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
    if (cfg.energy_diagnostics) {
      rec.energy_i = w.dot(mass * w);
      rec.energy_p = w.dot(stiffness * w);
    }
    if (x_independent) rec.diffusion_scale = profile.value(0.5 * (result.space->cover().omega_min +
                                                                   result.space->cover().omega_max));
    result.steps.push_back(rec);
  }

  // Returns true when the run should stop at a stationary state.
  bool snapshot(int i, const Eigen::VectorXd& w) {
    if (i % cfg.snapshot_stride != 0 && i != steps) return false;
    const PdfField f{result.space, w, time(i)};
    const double m0 = pdf_moment(f, [](double) { return 1.0; });
    const double m1 = pdf_moment(f, [](double x) { return x; }) / m0;
    const double m2 = pdf_moment(f, [](double x) { return x * x; }) / m0;
    result.snapshots.push_back({time(i), w, m1, m2});
    if (!cfg.stop_at_stationarity || i == steps) return false;
    const double t = time(i);
    if (t - sc.model.t0() < cfg.stationarity_window) return false;
    const Snapshot& now = result.snapshots.back();
    for (auto it = result.snapshots.rbegin(); it != result.snapshots.rend() && it->t >= t - cfg.stationarity_window - 1e-12; ++it) {
      const double scale = std::sqrt(std::max(now.second_moment, 1e-300));
      if (std::abs(it->mean - now.mean) > cfg.stationarity_rtol * scale ||
          std::abs(it->second_moment - now.second_moment) > cfg.stationarity_rtol * now.second_moment)
        return false;
    }
    result.stopped_stationary = true;
    return true;
  }

  void finish() {
    double total = 0.0;
    int counted = 0;
    for (const auto& s : result.steps)
      if (s.iterations > 0) {
        total += s.iterations;
        ++counted;
        result.max_iterations = std::max(result.max_iterations, s.iterations);
      }
    result.mean_iterations = counted ? total / counted : 0.0;
  }
};

DiffusionCoefficient local_diffusion(const Scenario& sc, const SolveConfig& cfg) {
  switch (cfg.method) {
    case Method::exact_linear: return linear_diffusion(sc, cfg.quadrature);
    case Method::white_noise: return white_noise_diffusion(sc);
    case Method::sct: return sct_diffusion(sc, cfg.quadrature);
    case Method::fox: return fox_diffusion(sc, cfg.quadrature);
    default: throw UsageError("run_local: method " + to_string(cfg.method) + " needs run_vada");
  }
}

double relative_gap(const MomentSet& a, double r_hprime, const std::vector<double>& r_gk) {
  double gap = std::abs(a.r_hprime - r_hprime) / std::max(1.0, std::abs(a.r_hprime));
  for (std::size_t i = 0; i < r_gk.size(); ++i)
    gap = std::max(gap, std::abs(a.r_gk[i] - r_gk[i]) / std::max(1.0, std::abs(a.r_gk[i])));
  return gap;
}

}  // namespace

SolveResult run_local(const Scenario& sc, const SolveConfig& cfg) {
  if (cfg.method == Method::exact_linear && !sc.model.is_linear())
    throw UsageError("exact_linear requires a linear model");
  if (cfg.method == Method::white_noise && !sc.noise.is_white())
    throw UsageError("white_noise requires a white-noise kernel");
  const DiffusionCoefficient diff = local_diffusion(sc, cfg);
  Marcher run(sc, cfg);
  const PufemSpace& space = *run.result.space;

  std::vector<double> scan;
  if (diff.kind() == DiffusionKind::sct) {
    const auto& cover = space.cover();
    scan = linspace(cover.omega_min, cover.omega_max, 10 * (cover.K + 1) + 1);
  }

  Eigen::VectorXd w = run.initial_weights();
  DiffusionProfile profile = diff.at(run.time(0));
  Eigen::MatrixXd A = assemble_system(space, run.drift, profile, run.time(0));
  run.record(0, w, 0, 0.0, profile, diff.x_independent());
  run.snapshot(0, w);

  for (int i = 1; i <= run.steps; ++i) {
    const double t = run.time(i);
    profile = diff.at(t);
    const Eigen::MatrixXd A_next = assemble_system(space, run.drift, profile, t);
    w = crank_nicolson_step(space, run.mass, A, A_next, w, run.dt, cfg.backend, t);
    A = A_next;
    if (!scan.empty()) {
      const SctValidity v = check_sct_validity(diff, scan, t);
      if (!v.valid) {
        run.result.sct_events.push_back({t, v.x, v.value});
        if (cfg.abort_on_sct_negative)
          throw StepFailure("SCT diffusion negative at x=" + std::to_string(v.x), t, run.dt);
      }
    }
    run.record(i, w, 0, 0.0, profile, diff.x_independent());
    if (run.snapshot(i, w)) break;
  }
  run.finish();
  return std::move(run.result);
}

SolveResult run_vada(const Scenario& sc, const SolveConfig& cfg) {
  if (cfg.method != Method::vada && cfg.method != Method::hanggi)
    throw UsageError("run_vada: method " + to_string(cfg.method) + " is not a VADA variant");
  const int M = cfg.method == Method::hanggi ? 0 : cfg.vada_order;
  Marcher run(sc, cfg);
  run.result.vada_order = M;
  const PufemSpace& space = *run.result.space;
  const ModelSpec& model = sc.model;

  std::optional<OuMemory> memory;
  if (sc.noise.ou() && cfg.quadrature.closed_form) memory.emplace(sc, M);
  auto intensities = [&](const MomentHistory& h) {
    return memory ? memory->evaluate(h) : vada_dm_eff(sc, h, M);
  };
  auto coefficient = [&](const MomentHistory& h) {
    return vada_diffusion(sc, M, intensities(h), h.r_gk(h.size() - 1), cfg.allow_odd);
  };

  Eigen::VectorXd w = run.initial_weights();
  MomentHistory& history = run.result.history;
  history = MomentHistory(model.nonlinear_degrees());
  const MomentSet m0 = compute_moments({run.result.space, w, run.time(0)}, model);
  history.append(run.time(0), m0.r_hprime, m0.r_gk);

  DiffusionCoefficient diff = coefficient(history);
  DiffusionProfile profile = diff.at(run.time(0));
  Eigen::MatrixXd A = assemble_system(space, run.drift, profile, run.time(0));
  run.record(0, w, 0, 0.0, profile, diff.x_independent());
  run.snapshot(0, w);

  for (int i = 1; i <= run.steps; ++i) {
    const double t = run.time(i);
    const std::size_t last = history.size() - 1;
    double r_h = history.r_hprime(last);
    std::vector<double> r_g = history.r_gk(last);
    if (i >= 2) {
      const std::size_t prev = last - 1;
      r_h = 2.0 * r_h - history.r_hprime(prev);
      for (std::size_t k = 0; k < r_g.size(); ++k) r_g[k] = 2.0 * r_g[k] - history.r_gk(prev)[k];
    }
    history.append(t, r_h, r_g);

    Eigen::VectorXd w_next;
    Eigen::MatrixXd A_next;
    double residual = std::numeric_limits<double>::infinity();
    double previous = residual;
    int iter = 0;
    while (true) {
      ++iter;
      diff = coefficient(history);
      profile = diff.at(t);
      A_next = assemble_system(space, run.drift, profile, t);
      w_next = crank_nicolson_step(space, run.mass, A, A_next, w, run.dt, cfg.backend, t);
      const MomentSet upd = compute_moments({run.result.space, w_next, t}, model);
      residual = relative_gap(upd, history.r_hprime(last + 1), history.r_gk(last + 1));
      history.replace_last(upd.r_hprime, upd.r_gk);
      if (residual > previous) ++run.result.residual_increases;
      previous = residual;
      if (residual <= cfg.eps_tol) break;
      if (iter >= cfg.max_iters)
        throw StepFailure("moment iteration did not converge, residual " + std::to_string(residual), t, run.dt);
    }
    if (memory) memory->commit(history);
    w = std::move(w_next);
    A = std::move(A_next);
    run.record(i, w, iter, residual, profile, diff.x_independent());
    if (run.snapshot(i, w)) break;
  }
  if (run.result.residual_increases > 0)
    run.result.warnings.push_back("moment residual increased within a step " +
                                  std::to_string(run.result.residual_increases) + " time(s)");
  run.finish();
  return std::move(run.result);
}

SolveResult solve(const Scenario& sc, const SolveConfig& cfg) {
  if (cfg.method == Method::vada || cfg.method == Method::hanggi) return run_vada(sc, cfg);
  return run_local(sc, cfg);
}

std::vector<double> energy_residuals(const SolveResult& result, const ModelSpec& model) {
  if (!model.is_linear()) throw UsageError("energy_residuals: the identity holds for linear models only");
  const double eta1 = model.eta(1);
  std::vector<double> out;
  const auto& s = result.steps;
  for (std::size_t i = 1; i + 1 < s.size(); ++i) {
    if (std::isnan(s[i].energy_i) || std::isnan(s[i].diffusion_scale)) continue;
    const double dI = (s[i + 1].energy_i - s[i - 1].energy_i) / (s[i + 1].t - s[i - 1].t);
    const double a = 0.5 * dI;
    const double b = 0.5 * eta1 * s[i].energy_i;
    const double c = s[i].diffusion_scale * s[i].energy_p;
    const double scale = std::max({std::abs(a), std::abs(b), std::abs(c)});
    out.push_back(scale > 0.0 ? std::abs(a + b + c) / scale : 0.0);
  }
  return out;
}

}  // namespace genfpk
