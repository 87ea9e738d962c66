#include <CLI11.hpp>
#include <iostream>

#include <genfpk/errors.hpp>

#include "commands.hpp"

namespace {

enum Exit { ok = 0, validation = 2, solver_failure = 3, divergence = 4 };

void add_solve_flags(CLI::App* app, genfpk::cli::SolveOptions& o) {
  app->add_option("--method", o.method, "exact_linear | white_noise | sct | fox | hanggi | vada | vada2 | vada4")
      ->capture_default_str();
  app->add_option("--vada-order", o.vada_order, "VADA truncation order")->capture_default_str();
  app->add_flag("--allow-odd", o.allow_odd, "Accept odd VADA orders");
  app->add_option("--K", o.K, "Number of PU subdomains")->capture_default_str();
  app->add_option("--basis", o.basis, "Legendre functions per subdomain")->capture_default_str();
  app->add_option("--smoothness", o.smoothness, "PU smoothness s (1..3)")->capture_default_str();
  app->add_option("--dt", o.dt, "Time step (0 selects the default)")->capture_default_str();
  app->add_option("--eps-tol", o.eps_tol, "VADA predictor-corrector tolerance")->capture_default_str();
  app->add_option("--domain", o.domain, "Spatial domain: MIN MAX")->expected(2);
  app->add_option("--backend", o.backend, "Linear solver: dense | banded")->capture_default_str();
  app->add_option("--grid-points", o.grid_points, "Points of the output grid")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  using namespace genfpk::cli;
  CLI::App app{"genfpk: PUFEM solvers for genFPK equations of coloured-noise driven systems"};
  app.require_subcommand(1);
  std::string command;
  for (int i = 0; i < argc; ++i) command += (i ? " " : "") + std::string(argv[i]);

  std::string scenario, out = "run";
  SolveOptions solve_opts;
  auto* solve = app.add_subcommand("solve", "Solve a genFPK equation and write snapshots");
  solve->add_option("scenario", scenario, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  solve->add_option("--out", out, "Output directory")->capture_default_str();
  solve->add_flag("--until-stationary", solve_opts.until_stationary, "Stop once the moments are stationary");
  add_solve_flags(solve, solve_opts);

  McOptions mc_opts;
  auto* mc = app.add_subcommand("mc", "Monte Carlo ensemble with kernel density estimates");
  mc->add_option("scenario", scenario, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  mc->add_option("--out", out, "Output directory")->capture_default_str();
  mc->add_option("--samples", mc_opts.samples, "Number of sample paths")->capture_default_str();
  mc->add_option("--seed", mc_opts.seed, "Master seed")->capture_default_str();
  mc->add_option("--snapshots", mc_opts.snapshots, "Snapshot count over [t0, t_end]")->capture_default_str();
  mc->add_flag("--stationary", mc_opts.stationary, "Sample the stationary distribution");
  mc->add_option("--per-path", mc_opts.per_path, "Stationary samples per path")->capture_default_str();
  mc->add_option("--domain", mc_opts.domain, "KDE grid range: MIN MAX")->expected(2);
  mc->add_option("--grid-points", mc_opts.grid_points, "Points of the KDE grid")->capture_default_str();
  mc->add_option("--threads", mc_opts.threads, "Worker threads (0 = all cores)")->capture_default_str();

  std::vector<std::string> runs;
  auto* compare = app.add_subcommand("compare", "Compare run directories against the first one");
  compare->add_option("runs", runs, "Run directories")->required()->expected(2, -1);
  compare->add_option("--out", out, "Report directory")->capture_default_str();

  SweepOptions sweep_opts;
  SolveOptions sweep_solve;
  sweep_solve.backend = "banded";
  auto* sweep = app.add_subcommand("sweep", "Bistable (D, tau) sweep against Monte Carlo");
  sweep->add_option("--D", sweep_opts.D, "Noise intensities")->capture_default_str();
  sweep->add_option("--tau", sweep_opts.tau, "Correlation times")->capture_default_str();
  sweep->add_option("--methods", sweep_opts.methods, "Methods per cell")->capture_default_str();
  sweep->add_option("--sigma", sweep_opts.sigma, "Initial standard deviation")->capture_default_str();
  sweep->add_option("--samples", sweep_opts.samples, "Stationary Monte Carlo samples per cell")
      ->capture_default_str();
  sweep->add_option("--seed", sweep_opts.seed, "Master seed")->capture_default_str();
  sweep->add_option("--jobs", sweep_opts.jobs, "Parallel solver runs (0 = all cores)")->capture_default_str();
  sweep->add_option("--out", out, "Output directory")->capture_default_str();
  add_solve_flags(sweep, sweep_solve);

  SolveOptions validate_opts;
  auto* validate = app.add_subcommand("validate-scenario", "Check a scenario file and optional method flags");
  validate->add_option("scenario", scenario, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  add_solve_flags(validate, validate_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : validation;
  }

  try {
    if (*solve) cmd_solve(command, scenario, solve_opts, out);
    else if (*mc) cmd_mc(command, scenario, mc_opts, out);
    else if (*compare) cmd_compare(command, runs, out);
    else if (*sweep) cmd_sweep(command, sweep_opts, sweep_solve, out);
    else if (*validate) {
      const bool with_method = validate->count("--method") > 0 || validate->count("--vada-order") > 0;
      cmd_validate(scenario, with_method ? std::optional<SolveOptions>(validate_opts) : std::nullopt);
    }
  } catch (const genfpk::DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << "\n";
    return divergence;
  } catch (const genfpk::StepFailure& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return solver_failure;
  } catch (const genfpk::ParseError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return validation;
  } catch (const genfpk::ParameterError& e) {
    std::cerr << "invalid parameter: " << e.what() << "\n";
    return validation;
  } catch (const genfpk::UsageError& e) {
    std::cerr << "invalid usage: " << e.what() << "\n";
    return validation;
  } catch (const genfpk::ConfigurationError& e) {
    std::cerr << "invalid configuration: " << e.what() << "\n";
    return validation;
  } catch (const genfpk::DomainError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return validation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return solver_failure;
  }
  return ok;
}
