#include "genfpk/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <thread>

#include "genfpk/analytic.hpp"
#include "genfpk/errors.hpp"

namespace genfpk {
namespace {

constexpr int kBlock = 256;
constexpr double kBlowup = 1e6;

const OuKernel& require_ou(const NoiseSpec& noise, const char* who) {
  const auto* ou = noise.ou();
  if (!ou) throw UsageError(std::string(who) + ": requires an OU kernel");
  return *ou;
}

std::mt19937_64 block_stream(std::uint64_t seed, int block) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(block), 0x9e3779b9u};
  return std::mt19937_64(seq);
}

// Runs fn(block) for every block on a small worker pool.
template <class Fn>
void for_blocks(int blocks, int threads, Fn&& fn) {
  int n = threads > 0 ? threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  n = std::min(n, blocks);
  if (n <= 1) {
    for (int b = 0; b < blocks; ++b) fn(b);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int i = 0; i < n; ++i)
    pool.emplace_back([&] {
      for (int b = next++; b < blocks; b = next++) fn(b);
    });
  for (auto& th : pool) th.join();
}

// One realization: X(0) from the initial Gaussian, stationary OU start, Heun
// steps. `visit(step, x)` is called after every step and at step 0; returns
// false when the path blew up.
struct PathStepper {
  const Scenario& sc;
  double dt;
  double rho;
  double innov;
  double sd_stat;

  PathStepper(const Scenario& scenario, double dt_mc) : sc(scenario), dt(dt_mc) {
    const OuKernel& ou = require_ou(sc.noise, "integrate_paths");
    sd_stat = std::sqrt(ou.zero_lag());
    rho = std::exp(-ou.rate() * dt);
    innov = sd_stat * std::sqrt(1.0 - rho * rho);
  }

  template <class Visit>
  bool run(std::mt19937_64& rng, long steps, Visit&& visit) const {
    std::normal_distribution<double> normal;
    const double t0 = sc.model.t0();
    const double k = sc.model.kappa();
    double x = sc.init.mean + sc.init.stddev() * normal(rng);
    double xi = sd_stat * normal(rng);
    visit(0L, x);
    for (long j = 0; j < steps; ++j) {
      const double t = t0 + j * dt;
      const double xi_next = rho * xi + innov * normal(rng);
      const double k1 = sc.model.h(x) + k * (sc.noise.mean(t) + xi);
      const double xp = x + dt * k1;
      const double k2 = sc.model.h(xp) + k * (sc.noise.mean(t + dt) + xi_next);
      x += 0.5 * dt * (k1 + k2);
      xi = xi_next;
      if (!std::isfinite(x) || std::abs(x) > kBlowup) return false;
      visit(j + 1, x);
    }
    return true;
  }
};

}  // namespace

std::vector<double> ou_sample_path(const NoiseSpec& noise, const std::vector<double>& t_grid,
                                   std::mt19937_64& rng) {
  const OuKernel& ou = require_ou(noise, "ou_sample_path");
  std::vector<double> out(t_grid.size());
  if (t_grid.empty()) return out;
  std::normal_distribution<double> normal;
  const double sd = std::sqrt(ou.zero_lag());
  double xi = sd * normal(rng);
  out[0] = xi + noise.mean(t_grid[0]);
  for (std::size_t j = 1; j < t_grid.size(); ++j) {
    const double rho = std::exp(-ou.rate() * (t_grid[j] - t_grid[j - 1]));
    xi = rho * xi + sd * std::sqrt(1.0 - rho * rho) * normal(rng);
    out[j] = xi + noise.mean(t_grid[j]);
  }
  return out;
}

double default_mc_dt(const Scenario& sc) {
  const OuKernel& ou = require_ou(sc.noise, "default_mc_dt");
  const double eta1 = std::abs(sc.model.eta(1));
  const double tau_rel = eta1 > 0.0 ? 1.0 / (2.0 * eta1) : 0.5;
  return std::min(ou.tau / 20.0, tau_rel / 50.0);
}

PathEnsemble integrate_paths(const Scenario& sc, double dt_mc, const std::vector<double>& snapshot_times,
                             int samples, std::uint64_t seed, int threads) {
  if (samples < 1) throw ParameterError("integrate_paths: need at least one path");
  if (!(dt_mc > 0.0)) throw ParameterError("integrate_paths: dt must be positive");
  const PathStepper stepper(sc, dt_mc);
  const double t0 = sc.model.t0();
  std::vector<long> snap_step;
  long last = 0;
  for (double t : snapshot_times) {
    if (t < t0 - 1e-12) throw ParameterError("integrate_paths: snapshot before t0");
    snap_step.push_back(std::lround((t - t0) / dt_mc));
    last = std::max(last, snap_step.back());
  }
  PathEnsemble ens;
  ens.samples = samples;
  ens.seed = seed;
  ens.dt = dt_mc;
  for (long s : snap_step) ens.times.push_back(t0 + s * dt_mc);
  ens.states.assign(snapshot_times.size(), std::vector<double>(samples, std::nan("")));

  // Snapshot indices ordered by step so each path advances a cursor.
  std::vector<std::size_t> order(snap_step.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return snap_step[a] < snap_step[b]; });

  const int blocks = (samples + kBlock - 1) / kBlock;
  std::vector<std::size_t> flagged(blocks, 0);
  for_blocks(blocks, threads, [&](int b) {
    std::mt19937_64 rng = block_stream(seed, b);
    const int end = std::min(samples, (b + 1) * kBlock);
    for (int p = b * kBlock; p < end; ++p) {
      std::size_t cursor = 0;
      const bool ok = stepper.run(rng, last, [&](long step, double x) {
        while (cursor < order.size() && snap_step[order[cursor]] == step) ens.states[order[cursor++]][p] = x;
      });
      if (!ok) ++flagged[b];
    }
  });
  for (auto f : flagged) ens.flagged += f;
  if (ens.flagged > static_cast<std::size_t>(samples) / 1000)
    throw DivergenceError(std::to_string(ens.flagged) + " of " + std::to_string(samples) + " paths blew up",
                          t0 + last * dt_mc, dt_mc);
  return ens;
}

double scott_bandwidth(const std::vector<double>& samples) {
  double mean = 0.0, m2 = 0.0;
  std::size_t n = 0;
  for (double x : samples) {
    if (!std::isfinite(x)) continue;
    ++n;
    const double d = x - mean;
    mean += d / n;
    m2 += d * (x - mean);
  }
  if (n < 2) throw ParameterError("kde: need at least two finite samples");
  const double sd = std::sqrt(m2 / (n - 1));
  if (!(sd > 0.0)) throw ParameterError("kde: samples have zero variance");
  return sd * std::pow(static_cast<double>(n), -0.2);
}

std::vector<double> kde_estimate(const std::vector<double>& samples, const std::vector<double>& grid) {
  if (samples.size() < 100) throw ParameterError("kde_estimate: need at least 100 samples");
  if (grid.size() < 2 || !std::is_sorted(grid.begin(), grid.end()))
    throw ParameterError("kde_estimate: grid must be increasing with at least two points");
  const double h = scott_bandwidth(samples);
  const double reach = 8.0 * h;
  const double norm = 1.0 / (h * std::sqrt(2.0 * std::numbers::pi));
  std::vector<double> f(grid.size(), 0.0);
  std::size_t n = 0;
  for (double x : samples) {
    if (!std::isfinite(x)) continue;
    ++n;
    auto it = std::lower_bound(grid.begin(), grid.end(), x - reach);
    for (; it != grid.end() && *it <= x + reach; ++it) {
      const double z = (*it - x) / h;
      f[it - grid.begin()] += std::exp(-0.5 * z * z);
    }
  }
  for (double& v : f) v *= norm / n;
  const double z = trapezoid(grid, f);
  if (!(z > 0.0)) throw ParameterError("kde_estimate: grid does not cover the samples");
  for (double& v : f) v /= z;
  return f;
}

StationarySample stationary_sampling(const Scenario& sc, double dt_mc, std::uint64_t seed,
                                     const StationaryOptions& opts) {
  const OuKernel& ou = require_ou(sc.noise, "stationary_sampling");
  if (!(dt_mc > 0.0)) throw ParameterError("stationary_sampling: dt must be positive");
  if (opts.paths < 1 || opts.samples_per_path < 1) throw ParameterError("stationary_sampling: empty sample");
  const PathStepper stepper(sc, dt_mc);
  const double spacing = 2.0 * ou.tau;
  const long spacing_steps = std::max(1L, std::lround(spacing / dt_mc));
  const long check_steps = std::max(1L, std::lround(std::min(spacing, 0.5) / dt_mc));
  const int blocks = (opts.paths + kBlock - 1) / kBlock;

  double horizon = std::min(opts.max_time, std::max(30.0, 30.0 * ou.tau));
  while (true) {
    const long horizon_steps = std::lround(horizon / dt_mc);
    const long checks = horizon_steps / check_steps + 1;
    // Per block moment sums at every checkpoint: x, x^2, x^4.
    std::vector<std::vector<double>> s1(blocks, std::vector<double>(checks, 0.0));
    std::vector<std::vector<double>> s2 = s1, s4 = s1;
    std::vector<std::vector<double>> collected(blocks);
    std::vector<std::size_t> flagged(blocks, 0);
    const long total = horizon_steps + spacing_steps * (opts.samples_per_path - 1);

    for_blocks(blocks, opts.threads, [&](int b) {
      std::mt19937_64 rng = block_stream(seed, b);
      const int end = std::min(opts.paths, (b + 1) * kBlock);
      for (int p = b * kBlock; p < end; ++p) {
        std::vector<double> mine;
        std::vector<double> c1(checks, 0.0), c2(checks, 0.0), c4(checks, 0.0);
        const bool ok = stepper.run(rng, total, [&](long step, double x) {
          if (step <= horizon_steps && step % check_steps == 0) {
            const long c = step / check_steps;
            c1[c] = x;
            c2[c] = x * x;
            c4[c] = x * x * x * x;
          }
          if (step >= horizon_steps && (step - horizon_steps) % spacing_steps == 0) mine.push_back(x);
        });
        if (!ok) {
          ++flagged[b];
          continue;
        }
        for (long c = 0; c < checks; ++c) {
          s1[b][c] += c1[c];
          s2[b][c] += c2[c];
          s4[b][c] += c4[c];
        }
        collected[b].insert(collected[b].end(), mine.begin(), mine.end());
      }
    });

    std::size_t bad = 0;
    for (auto f : flagged) bad += f;
    if (bad > static_cast<std::size_t>(opts.paths) / 1000)
      throw DivergenceError(std::to_string(bad) + " Monte Carlo paths blew up", sc.model.t0() + horizon, dt_mc);
    const double n = static_cast<double>(opts.paths - bad);

    std::vector<double> m1(checks, 0.0), m2(checks, 0.0), m4(checks, 0.0);
    for (int b = 0; b < blocks; ++b)
      for (long c = 0; c < checks; ++c) {
        m1[c] += s1[b][c] / n;
        m2[c] += s2[b][c] / n;
        m4[c] += s4[b][c] / n;
      }
    // Reference moments from the last third of the horizon.
    const long tail = 2 * checks / 3;
    double r1 = 0.0, r2 = 0.0, r4 = 0.0;
    for (long c = tail; c < checks; ++c) {
      r1 += m1[c];
      r2 += m2[c];
      r4 += m4[c];
    }
    r1 /= (checks - tail);
    r2 /= (checks - tail);
    r4 /= (checks - tail);
    const double tol1 = std::max(opts.rtol * std::sqrt(r2), 4.0 * std::sqrt(std::max(r2 - r1 * r1, 0.0) / n));
    const double tol2 = std::max(opts.rtol * r2, 4.0 * std::sqrt(std::max(r4 - r2 * r2, 0.0) / n));
    long first = checks;
    for (long c = checks - 1; c >= 0; --c) {
      if (std::abs(m1[c] - r1) > tol1 || std::abs(m2[c] - r2) > tol2) break;
      first = c;
    }
    const double t_st = first * check_steps * dt_mc;
    // Stationary from t_st and unchanged for a further 2 t_st within the horizon.
    if (first < checks && 3.0 * t_st <= horizon + 1e-9) {
      StationarySample out;
      out.t_st = t_st;
      out.spacing = spacing_steps * dt_mc;
      out.horizon = horizon;
      out.flagged = bad;
      for (auto& part : collected) out.samples.insert(out.samples.end(), part.begin(), part.end());
      return out;
    }
    if (horizon >= opts.max_time)
      throw DivergenceError("stationarity not reached within the Monte Carlo horizon", sc.model.t0() + horizon,
                            dt_mc);
    horizon = std::min(opts.max_time, 2.0 * horizon);
  }
}

std::vector<std::pair<double, double>> find_peaks(const std::vector<double>& grid, const std::vector<double>& p,
                                                  double threshold) {
  if (grid.size() != p.size()) throw UsageError("find_peaks: grid mismatch");
  std::vector<std::pair<double, double>> out;
  if (p.size() < 3) return out;
  const double top = *std::max_element(p.begin(), p.end());
  for (std::size_t i = 1; i + 1 < p.size(); ++i)
    if (p[i] >= p[i - 1] && p[i] > p[i + 1] && p[i] >= threshold * top) out.emplace_back(grid[i], p[i]);
  return out;
}

PdfComparison compare_pdfs(const std::vector<double>& grid, const std::vector<double>& p,
                           const std::vector<double>& q) {
  if (grid.size() != p.size() || grid.size() != q.size()) throw UsageError("compare_pdfs: grid mismatch");
  PdfComparison out;
  std::vector<double> diff(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    diff[i] = std::abs(p[i] - q[i]);
    out.linf = std::max(out.linf, diff[i]);
  }
  out.l1 = trapezoid(grid, diff);
  for (const auto& [x, h] : find_peaks(grid, p)) {
    out.peak_x.push_back(x);
    out.peak_height.push_back(h);
  }
  for (const auto& [x, h] : find_peaks(grid, q)) {
    out.q_peak_x.push_back(x);
    out.q_peak_height.push_back(h);
  }
  return out;
}

}  // namespace genfpk
