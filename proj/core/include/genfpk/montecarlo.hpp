#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "genfpk/model.hpp"

namespace genfpk {

/// Exact OU recursion on a uniform grid, stationary initial draw, plus the
/// deterministic mean m_Xi(t).
std::vector<double> ou_sample_path(const NoiseSpec& noise, const std::vector<double>& t_grid,
                                   std::mt19937_64& rng);

/// dt_mc = min(tau / 20, tau_rel / 50).
double default_mc_dt(const Scenario& scenario);

struct PathEnsemble {
  std::vector<double> times;                ///< snapshot times
  std::vector<std::vector<double>> states;  ///< states[snapshot][path]
  int samples = 0;
  std::uint64_t seed = 0;
  double dt = 0.0;
  std::size_t flagged = 0;  ///< paths that exceeded the blow-up cap
};

/// Heun integration of dX/dt = h(X) + kappa Xi(t) per path. Paths are split
/// into fixed blocks with their own RNG streams, so results do not depend on
/// the thread count. Snapshot times are rounded to the nearest step.
PathEnsemble integrate_paths(const Scenario& scenario, double dt_mc, const std::vector<double>& snapshot_times,
                             int samples, std::uint64_t seed, int threads = 0);

/// Gaussian KDE with Scott's bandwidth, renormalized on the grid.
std::vector<double> kde_estimate(const std::vector<double>& samples, const std::vector<double>& grid);
double scott_bandwidth(const std::vector<double>& samples);

struct StationaryOptions {
  int paths = 20000;
  int samples_per_path = 5;
  /// Relative tolerance on the first two moments when locating t_st.
  double rtol = 0.02;
  double max_time = 400.0;
  int threads = 0;
};

struct StationarySample {
  std::vector<double> samples;
  double t_st = 0.0;
  double spacing = 0.0;  ///< time between successive samples of one path (2 tau)
  double horizon = 0.0;  ///< time integrated before collecting
  std::size_t flagged = 0;
};

/// Locates t_st from the invariance of the first two ensemble moments,
/// confirms they stay unchanged for a further 2 t_st, then records every
/// path every 2 tau.
StationarySample stationary_sampling(const Scenario& scenario, double dt_mc, std::uint64_t seed,
                                     const StationaryOptions& opts = {});

struct PdfComparison {
  double l1 = 0.0;
  double linf = 0.0;
  std::vector<double> peak_x;  ///< peaks of p
  std::vector<double> peak_height;
  std::vector<double> q_peak_x;  ///< peaks of q
  std::vector<double> q_peak_height;
};

/// Local maxima (3-point stencil) above `threshold` times the global maximum.
std::vector<std::pair<double, double>> find_peaks(const std::vector<double>& grid, const std::vector<double>& p,
                                                  double threshold = 0.1);

/// Trapezoid L1, sup norm, and the peaks of both densities.
PdfComparison compare_pdfs(const std::vector<double>& grid, const std::vector<double>& p,
                           const std::vector<double>& q);

}  // namespace genfpk
