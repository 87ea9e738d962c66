#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <genfpk/solver.hpp>

namespace genfpk::cli {

/// Discretization and method flags shared by solve, sweep and validate-scenario.
struct SolveOptions {
  std::string method = "vada";
  int vada_order = 2;
  bool allow_odd = false;
  int K = 50;
  int basis = 4;
  int smoothness = 2;
  double dt = 0.0;
  double eps_tol = 1e-8;
  std::vector<double> domain;  ///< empty or {min, max}
  std::string backend = "dense";
  int grid_points = 401;
  bool until_stationary = false;

  SolveConfig config() const;
};

struct McOptions {
  int samples = 50000;
  std::uint64_t seed = 1;
  int snapshots = 11;
  bool stationary = false;
  int per_path = 5;
  std::vector<double> domain;
  int grid_points = 401;
  int threads = 0;
};

struct SweepOptions {
  std::vector<double> D{0.2, 1.0, 2.0, 5.0};
  std::vector<double> tau{0.1, 1.0, 5.0};
  std::vector<std::string> methods{"han", "vada2"};
  double sigma = 0.6;
  int samples = 100000;
  std::uint64_t seed = 11;
  int jobs = 0;
};

/// `command` is the full command line, recorded in every manifest.
void cmd_solve(const std::string& command, const std::string& scenario_file, const SolveOptions& opts,
               const std::string& out_dir);
void cmd_mc(const std::string& command, const std::string& scenario_file, const McOptions& opts,
            const std::string& out_dir);
void cmd_compare(const std::string& command, const std::vector<std::string>& run_dirs, const std::string& out_dir);
void cmd_sweep(const std::string& command, const SweepOptions& sweep, const SolveOptions& solve,
               const std::string& out_dir);
void cmd_validate(const std::string& scenario_file, const std::optional<SolveOptions>& opts);

}  // namespace genfpk::cli
