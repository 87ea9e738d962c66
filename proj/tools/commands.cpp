#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <genfpk/genfpk.hpp>

namespace fs = std::filesystem;

namespace genfpk::cli {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// "vada2", "vada-4" and friends carry the order; other names defer to parse_method.
std::pair<Method, int> method_token(const std::string& token, int default_order) {
  std::string lower = token;
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower.rfind("vada", 0) == 0 && lower.size() > 4) {
    std::string digits = lower.substr(4);
    if (!digits.empty() && digits.front() == '-') digits.erase(0, 1);
    if (digits == "ii") return {Method::vada, 2};
    if (digits == "iv") return {Method::vada, 4};
    if (!digits.empty() && std::all_of(digits.begin(), digits.end(), ::isdigit))
      return {Method::vada, std::stoi(digits)};
    throw UsageError("cannot read a VADA order from '" + token + "'");
  }
  return {parse_method(lower), default_order};
}

std::string method_label(Method m, int order) {
  return m == Method::vada ? "vada" + std::to_string(order) : to_string(m);
}

fs::path prepare_dir(const std::string& dir) {
  const fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw ConfigurationError("cannot create output directory " + dir + ": " + ec.message());
  return p;
}

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(6) << v;
  return s.str();
}

// Writes rows of preformatted cells; used where columns mix text and numbers.
void write_table(const fs::path& path, const std::vector<std::string>& header,
                 const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path);
  if (!out) throw ConfigurationError("cannot write " + path.string());
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << '\n';
  }
}

std::pair<double, double> symmetric_support(std::vector<double> samples, double floor) {
  for (auto& x : samples) x = std::abs(x);
  std::sort(samples.begin(), samples.end());
  const double q = samples[static_cast<std::size_t>(0.9999 * (samples.size() - 1))];
  const double L = std::max(floor, 1.15 * q);
  return {-L, L};
}

std::vector<double> interpolate(const std::vector<double>& x, const std::vector<double>& f,
                                const std::vector<double>& onto) {
  std::vector<double> out(onto.size(), 0.0);
  for (std::size_t i = 0; i < onto.size(); ++i) {
    const double v = onto[i];
    if (v < x.front() || v > x.back()) continue;
    const auto it = std::upper_bound(x.begin(), x.end(), v);
    const std::size_t j = it == x.end() ? x.size() - 1 : static_cast<std::size_t>(it - x.begin());
    if (j == 0) {
      out[i] = f[0];
      continue;
    }
    const double w = (v - x[j - 1]) / (x[j] - x[j - 1]);
    out[i] = (1.0 - w) * f[j - 1] + w * f[j];
  }
  return out;
}

void add_discretization(RunManifest& m, const SolveConfig& cfg, const SolveResult& r) {
  const auto& c = r.space->cover();
  m.discretization = {{"K", cfg.K},
                      {"basis", cfg.basis},
                      {"smoothness", cfg.smoothness},
                      {"dt", r.dt},
                      {"eps_tol", cfg.eps_tol},
                      {"domain_min", c.omega_min},
                      {"domain_max", c.omega_max}};
  if (cfg.method == Method::vada) m.discretization["vada_order"] = cfg.vada_order;
}

}  // namespace

SolveConfig SolveOptions::config() const {
  SolveConfig cfg;
  std::tie(cfg.method, cfg.vada_order) = method_token(method, vada_order);
  cfg.allow_odd = allow_odd;
  cfg.K = K;
  cfg.basis = basis;
  cfg.smoothness = smoothness;
  cfg.dt = dt;
  cfg.eps_tol = eps_tol;
  if (!domain.empty()) {
    if (domain.size() != 2) throw ParameterError("--domain takes two values");
    cfg.domain = std::make_pair(domain[0], domain[1]);
  }
  if (backend == "dense") cfg.backend = LinearBackend::dense;
  else if (backend == "banded") cfg.backend = LinearBackend::banded;
  else throw ParameterError("--backend must be dense or banded");
  if (grid_points < 2) throw ParameterError("--grid-points must be >= 2");
  cfg.stop_at_stationarity = until_stationary;
  cfg.validate();
  return cfg;
}

void cmd_solve(const std::string& command, const std::string& scenario_file, const SolveOptions& opts,
               const std::string& out_dir) {
  const Scenario sc = load_scenario(scenario_file);
  SolveConfig cfg = opts.config();
  cfg.energy_diagnostics = sc.model.is_linear();
  const fs::path dir = prepare_dir(out_dir);

  const auto start = Clock::now();
  const SolveResult r = solve(sc, cfg);
  const double solve_s = seconds_since(start);

  const auto& cover = r.space->cover();
  const auto grid = linspace(cover.omega_min, cover.omega_max, opts.grid_points);
  SnapshotTable table;
  for (std::size_t i = 0; i < r.snapshots.size(); ++i) {
    table.t.push_back(r.snapshots[i].t);
    table.x.push_back(grid);
    table.f.push_back(pdf_eval(r.field(i), grid));
  }
  RunManifest m;
  m.command = command;
  m.scenario_json = scenario_to_json(sc);
  m.method = method_label(cfg.method, cfg.vada_order);
  add_discretization(m, cfg, r);
  m.warnings = r.warnings;

  write_snapshots_csv((dir / "snapshots.csv").string(), table);
  m.files.push_back("snapshots.csv");

  std::vector<std::vector<double>> diag;
  for (const auto& s : r.steps) diag.push_back({s.t, s.mass, std::abs(s.mass - 1.0), double(s.iterations), s.residual});
  write_csv((dir / "diagnostics.csv").string(), {"t", "mass", "mass_drift", "iterations", "residual"}, diag);
  m.files.push_back("diagnostics.csv");

  if (sc.model.is_linear()) {
    const auto res = energy_residuals(r, sc.model);
    if (res.size() + 2 == r.steps.size()) {
      std::vector<std::vector<double>> rows;
      for (std::size_t i = 0; i < res.size(); ++i) rows.push_back({r.steps[i + 1].t, res[i]});
      write_csv((dir / "energy.csv").string(), {"t", "relative_residual"}, rows);
      m.files.push_back("energy.csv");
      m.diagnostics["max_energy_residual"] = res.empty() ? 0.0 : *std::max_element(res.begin(), res.end());
    }
  }
  if (!r.sct_events.empty()) {
    std::vector<std::vector<double>> rows;
    for (const auto& e : r.sct_events) rows.push_back({e.t, e.x, e.value});
    write_csv((dir / "sct_events.csv").string(), {"t", "x", "diffusion"}, rows);
    m.files.push_back("sct_events.csv");
    m.warnings.push_back("SCT diffusion negative at " + std::to_string(r.sct_events.size()) + " steps, first t=" +
                         fmt(r.sct_events.front().t) + " x=" + fmt(r.sct_events.front().x));
  }

  m.diagnostics["max_mass_drift"] = r.max_mass_drift;
  m.diagnostics["steps"] = static_cast<double>(r.steps.size()) - 1;
  m.diagnostics["snapshots"] = static_cast<double>(r.snapshots.size());
  m.diagnostics["sct_events"] = static_cast<double>(r.sct_events.size());
  if (cfg.method == Method::vada) {
    m.diagnostics["mean_iterations"] = r.mean_iterations;
    m.diagnostics["max_iterations"] = r.max_iterations;
  }
  const auto st = detect_stationarity(r, cfg.stationarity_window, cfg.stationarity_rtol);
  m.diagnostics["stationary"] = st.stationary;
  if (st.stationary) m.diagnostics["stationary_t"] = st.t;
  m.timings["solve_s"] = solve_s;
  m.files.push_back("manifest.json");
  write_manifest((dir / "manifest.json").string(), m);

  std::cout << m.method << ": " << r.snapshots.size() << " snapshots to t=" << fmt(r.snapshots.back().t)
            << ", max mass drift " << fmt(r.max_mass_drift) << ", " << fmt(solve_s) << " s\n";
  for (const auto& w : m.warnings) std::cout << "warning: " << w << "\n";
}

void cmd_mc(const std::string& command, const std::string& scenario_file, const McOptions& opts,
            const std::string& out_dir) {
  if (opts.samples < 1) throw ParameterError("--samples must be positive");
  if (opts.snapshots < 1) throw ParameterError("--snapshots must be positive");
  const Scenario sc = load_scenario(scenario_file);
  if (!sc.noise.ou()) throw UsageError("Monte Carlo simulation requires an OU kernel");
  const fs::path dir = prepare_dir(out_dir);
  const double dt = default_mc_dt(sc);

  RunManifest m;
  m.command = command;
  m.scenario_json = scenario_to_json(sc);
  m.method = opts.stationary ? "mc_stationary" : "mc";
  m.seeds = {opts.seed};
  m.discretization = {{"dt_mc", dt}, {"samples", opts.samples}};
  if (opts.samples < 1000)
    m.warnings.push_back("low sample count (" + std::to_string(opts.samples) +
                         "); density estimates are dominated by sampling noise");

  std::vector<double> times;
  std::vector<std::vector<double>> states;
  const auto start = Clock::now();
  if (opts.stationary) {
    StationaryOptions so;
    so.samples_per_path = std::max(1, opts.per_path);
    so.paths = std::max(1, (opts.samples + so.samples_per_path - 1) / so.samples_per_path);
    so.threads = opts.threads;
    const auto s = stationary_sampling(sc, dt, opts.seed, so);
    times = {sc.model.t0() + s.horizon};
    states = {s.samples};
    m.diagnostics = {{"t_st", s.t_st}, {"spacing", s.spacing}, {"horizon", s.horizon},
                     {"flagged", double(s.flagged)}};
    m.discretization["paths"] = so.paths;
    m.discretization["samples_per_path"] = so.samples_per_path;
  } else {
    const auto span = opts.snapshots == 1 ? std::vector<double>{sc.model.t_end()}
                                          : linspace(sc.model.t0(), sc.model.t_end(), opts.snapshots);
    const auto ens = integrate_paths(sc, dt, span, opts.samples, opts.seed, opts.threads);
    times = ens.times;
    states = ens.states;
    m.diagnostics = {{"flagged", double(ens.flagged)}};
  }
  m.timings["simulate_s"] = seconds_since(start);

  std::pair<double, double> dom;
  if (!opts.domain.empty()) {
    if (opts.domain.size() != 2 || !(opts.domain[1] > opts.domain[0]))
      throw ParameterError("--domain takes two increasing values");
    dom = {opts.domain[0], opts.domain[1]};
  } else {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& row : states)
      for (double x : row)
        if (std::isfinite(x)) lo = std::min(lo, x), hi = std::max(hi, x);
    const double pad = 0.1 * std::max(hi - lo, 1e-3);
    dom = {lo - pad, hi + pad};
  }
  m.discretization["domain_min"] = dom.first;
  m.discretization["domain_max"] = dom.second;

  const bool kde_ok = states.front().size() >= 100;
  if (kde_ok) {
    const auto grid = linspace(dom.first, dom.second, opts.grid_points);
    SnapshotTable table;
    for (std::size_t i = 0; i < times.size(); ++i) {
      std::vector<double> finite;
      for (double x : states[i])
        if (std::isfinite(x)) finite.push_back(x);
      table.t.push_back(times[i]);
      table.x.push_back(grid);
      table.f.push_back(kde_estimate(finite, grid));
    }
    write_snapshots_csv((dir / "snapshots.csv").string(), table);
    m.files.push_back("snapshots.csv");
  } else {
    m.warnings.push_back("fewer than 100 samples per snapshot; density estimate skipped");
  }
  if (!kde_ok || opts.samples <= 1000) {
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < times.size(); ++i)
      for (double x : states[i]) rows.push_back({times[i], x});
    write_csv((dir / "samples.csv").string(), {"t", "x"}, rows);
    m.files.push_back("samples.csv");
  }
  m.files.push_back("manifest.json");
  write_manifest((dir / "manifest.json").string(), m);
  std::cout << m.method << ": " << opts.samples << " samples, " << times.size() << " snapshots, "
            << fmt(m.timings["simulate_s"]) << " s\n";
  for (const auto& w : m.warnings) std::cout << "warning: " << w << "\n";
}

void cmd_compare(const std::string& command, const std::vector<std::string>& run_dirs, const std::string& out_dir) {
  if (run_dirs.size() < 2) throw UsageError("compare needs at least two run directories");
  std::vector<SnapshotTable> tables;
  std::vector<RunManifest> manifests;
  for (const auto& d : run_dirs) {
    manifests.push_back(read_manifest((fs::path(d) / "manifest.json").string()));
    const auto& files = manifests.back().files;
    if (std::find(files.begin(), files.end(), "snapshots.csv") == files.end())
      throw UsageError(d + " has no density snapshots to compare");
    tables.push_back(read_snapshots_csv((fs::path(d) / "snapshots.csv").string()));
    if (tables.back().t.empty()) throw ParseError(d + "/snapshots.csv has no rows");
  }
  for (std::size_t i = 1; i < manifests.size(); ++i) {
    const auto& a = manifests[0].scenario_json;
    const auto& b = manifests[i].scenario_json;
    if (!a.empty() && !b.empty() && a != b)
      throw ConfigurationError("runs " + run_dirs[0] + " and " + run_dirs[i] + " use different scenarios");
  }
  const fs::path dir = prepare_dir(out_dir);
  const auto& grid = tables[0].x.front();
  auto regridded = [&](std::size_t run, std::size_t row) {
    const auto& t = tables[run];
    return t.x[row] == grid ? t.f[row] : interpolate(t.x[row], t.f[row], grid);
  };

  std::vector<std::vector<double>> per_time, stationary, peaks;
  for (std::size_t r = 1; r < tables.size(); ++r) {
    for (std::size_t i = 0; i < tables[0].t.size(); ++i) {
      const double t = tables[0].t[i];
      for (std::size_t j = 0; j < tables[r].t.size(); ++j)
        if (std::abs(tables[r].t[j] - t) <= 1e-6 * std::max(1.0, std::abs(t))) {
          const auto c = compare_pdfs(grid, regridded(r, j), tables[0].f[i]);
          per_time.push_back({double(r), t, c.l1, c.linf});
          break;
        }
    }
    const auto c = compare_pdfs(grid, regridded(r, tables[r].t.size() - 1), tables[0].f.back());
    stationary.push_back({double(r), c.l1, c.linf});
  }
  std::vector<std::string> overlay_header{"x"};
  std::vector<std::vector<double>> finals;
  for (std::size_t r = 0; r < tables.size(); ++r) {
    finals.push_back(regridded(r, tables[r].t.size() - 1));
    overlay_header.push_back("f_" + std::to_string(r));
    for (const auto& p : find_peaks(grid, finals.back())) peaks.push_back({double(r), p.first, p.second});
  }
  std::vector<std::vector<double>> overlay;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::vector<double> row{grid[i]};
    for (const auto& f : finals) row.push_back(f[i]);
    overlay.push_back(std::move(row));
  }
  write_csv((dir / "errors.csv").string(), {"run", "t", "l1", "linf"}, per_time);
  write_csv((dir / "stationary.csv").string(), {"run", "l1", "linf"}, stationary);
  write_csv((dir / "peaks.csv").string(), {"run", "x", "height"}, peaks);
  write_csv((dir / "overlay.csv").string(), overlay_header, overlay);

  RunManifest m;
  m.command = command;
  m.scenario_json = manifests[0].scenario_json;
  m.method = "compare";
  m.diagnostics["runs"] = double(tables.size());
  m.diagnostics["matched_times"] = double(per_time.size());
  m.files = {"errors.csv", "stationary.csv", "peaks.csv", "overlay.csv", "manifest.json"};
  write_manifest((dir / "manifest.json").string(), m);

  std::cout << "reference: run 0 = " << run_dirs[0] << " (" << manifests[0].method << ")\n";
  std::cout << std::left << std::setw(5) << "run" << std::setw(16) << "method" << std::setw(14) << "final L1"
            << std::setw(14) << "final Linf" << "peaks |x|: height\n";
  for (std::size_t r = 0; r < tables.size(); ++r) {
    std::ostringstream pk;
    for (const auto& p : peaks)
      if (std::size_t(p[0]) == r) pk << fmt(p[1]) << ": " << fmt(p[2]) << "  ";
    std::cout << std::setw(5) << r << std::setw(16) << manifests[r].method;
    if (r == 0) std::cout << std::setw(14) << "-" << std::setw(14) << "-";
    else std::cout << std::setw(14) << fmt(stationary[r - 1][1]) << std::setw(14) << fmt(stationary[r - 1][2]);
    std::cout << pk.str() << "\n";
  }
}

void cmd_sweep(const std::string& command, const SweepOptions& sweep, const SolveOptions& solve_opts,
               const std::string& out_dir) {
  if (sweep.D.empty() || sweep.tau.empty() || sweep.methods.empty())
    throw ParameterError("sweep needs at least one D, one tau and one method");
  if (sweep.samples < 100) throw ParameterError("--samples must be at least 100 for a density estimate");
  std::vector<std::pair<Method, int>> methods;
  for (const auto& name : sweep.methods) methods.push_back(method_token(name, solve_opts.vada_order));
  SolveConfig base = solve_opts.config();
  base.energy_diagnostics = false;
  const fs::path dir = prepare_dir(out_dir);

  struct Cell {
    double D, tau;
    std::string name;
    Scenario sc;
    std::pair<double, double> domain;
    std::vector<double> grid;
    std::vector<double> mc;
    bool sct_invalid = false;
    std::string mc_status = "ok";
  };
  std::vector<Cell> cells;
  RunManifest top;
  top.command = command;
  top.method = "sweep";
  top.seeds = {sweep.seed};

  // Monte Carlo first; each simulation already uses every core.
  const auto mc_start = Clock::now();
  for (double D : sweep.D)
    for (double tau : sweep.tau) {
      std::ostringstream name;
      name << "cell_D" << D << "_tau" << tau;
      Cell c{D, tau, name.str(), bistable_scenario(D, tau, sweep.sigma, std::max(20.0, 6.0 * tau)), {}, {}, {}};
      std::cout << "MC " << c.name << std::flush;
      try {
        StationaryOptions so;
        so.paths = std::max(1, sweep.samples / so.samples_per_path);
        const auto s = stationary_sampling(c.sc, default_mc_dt(c.sc), sweep.seed, so);
        c.domain = symmetric_support(s.samples, 2.6);
        c.grid = linspace(c.domain.first, c.domain.second, solve_opts.grid_points);
        c.mc = kde_estimate(s.samples, c.grid);
        const auto v = check_sct_validity(sct_diffusion(c.sc), c.grid, c.sc.model.t_end());
        c.sct_invalid = !v.valid;
      } catch (const Error& e) {
        c.mc_status = std::string("mc failed: ") + e.what();
      }
      std::cout << " " << c.mc_status << "\n";
      cells.push_back(std::move(c));
    }
  top.timings["mc_s"] = seconds_since(mc_start);

  struct Job {
    std::size_t cell = 0;
    Method method = Method::vada;
    int order = 0;
    std::string status = "skipped";
    std::vector<double> f;
    double l1 = NAN, linf = NAN, peak_x = NAN, peak_h = NAN, t_st = NAN;
  };
  std::vector<Job> jobs;
  for (std::size_t i = 0; i < cells.size(); ++i)
    if (cells[i].mc_status == "ok")
      for (auto [m, o] : methods) {
        Job job;
        job.cell = i;
        job.method = m;
        job.order = o;
        jobs.push_back(std::move(job));
      }

  const auto solve_start = Clock::now();
  std::atomic<std::size_t> next{0};
  std::mutex print;
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs.size(); j = next++) {
      Job& job = jobs[j];
      const Cell& c = cells[job.cell];
      SolveConfig cfg = base;
      cfg.method = job.method;
      cfg.vada_order = job.order;
      cfg.domain = c.domain;
      try {
        cfg.validate();
        const SolveResult r = solve(c.sc, cfg);
        job.f = pdf_eval(r.final_field(), c.grid);
        const auto cmp = compare_pdfs(c.grid, job.f, c.mc);
        job.l1 = cmp.l1;
        job.linf = cmp.linf;
        double best = -1.0;
        for (std::size_t k = 0; k < cmp.peak_x.size(); ++k)
          if (cmp.peak_height[k] > best) best = cmp.peak_height[k], job.peak_x = std::abs(cmp.peak_x[k]);
        job.peak_h = best;
        const auto st = detect_stationarity(r, cfg.stationarity_window, cfg.stationarity_rtol);
        if (st.stationary) job.t_st = st.t;
        job.status = st.stationary ? "ok" : "not-stationary";
        if (!r.sct_events.empty()) job.status = "sct-negative";
      } catch (const DivergenceError&) {
        job.status = "diverged";
      } catch (const Error& e) {
        job.status = std::string("failed: ") + e.what();
      }
      std::lock_guard<std::mutex> lock(print);
      std::cout << c.name << " " << method_label(job.method, job.order) << ": " << job.status << " L1=" << fmt(job.l1)
                << "\n";
    }
  };
  const int n = sweep.jobs > 0 ? sweep.jobs : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::vector<std::thread> pool;
  for (int i = 0; i < std::min<int>(n, static_cast<int>(jobs.size())); ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  top.timings["solve_s"] = seconds_since(solve_start);

  auto cell_num = [](double v) { return std::isfinite(v) ? fmt(v) : std::string(); };
  std::vector<std::vector<std::string>> rows;
  for (std::size_t ci = 0; ci < cells.size(); ++ci) {
    const Cell& c = cells[ci];
    const fs::path cdir = prepare_dir((dir / c.name).string());
    RunManifest cm;
    cm.command = command;
    cm.scenario_json = scenario_to_json(c.sc);
    cm.method = "sweep-cell";
    cm.seeds = {sweep.seed};
    cm.diagnostics["sct_invalid"] = c.sct_invalid;
    if (c.mc_status != "ok") cm.warnings.push_back(c.mc_status);
    std::vector<std::string> header{"x", "mc"};
    std::vector<const Job*> mine;
    for (const auto& j : jobs)
      if (j.cell == ci) {
        mine.push_back(&j);
        const std::string label = method_label(j.method, j.order);
        if (!j.f.empty()) header.push_back(label);
        if (std::isfinite(j.l1)) cm.diagnostics["l1_" + label] = j.l1;
        if (j.status != "ok") cm.warnings.push_back(label + ": " + j.status);
      }
    if (!c.grid.empty()) {
      std::vector<std::vector<double>> pdf;
      for (std::size_t i = 0; i < c.grid.size(); ++i) {
        std::vector<double> row{c.grid[i], c.mc[i]};
        for (const Job* j : mine)
          if (!j->f.empty()) row.push_back(j->f[i]);
        pdf.push_back(std::move(row));
      }
      write_csv((cdir / "stationary.csv").string(), header, pdf);
      cm.files.push_back("stationary.csv");
      top.files.push_back(c.name + "/stationary.csv");
    }
    cm.files.push_back("manifest.json");
    write_manifest((cdir / "manifest.json").string(), cm);
    top.files.push_back(c.name + "/manifest.json");

    for (const Job* j : mine)
      rows.push_back({fmt(c.D), fmt(c.tau), fmt(c.D * c.tau), fmt(c.domain.second), method_label(j->method, j->order),
                      j->status, c.sct_invalid ? "1" : "0", cell_num(j->l1), cell_num(j->linf), cell_num(j->peak_x),
                      cell_num(j->peak_h), cell_num(j->t_st)});
    if (mine.empty())
      rows.push_back({fmt(c.D), fmt(c.tau), fmt(c.D * c.tau), "", "", c.mc_status, c.sct_invalid ? "1" : "0", "", "",
                      "", "", ""});
  }
  write_table(dir / "sweep.csv",
              {"D", "tau", "Dtau", "L", "method", "status", "sct_invalid", "l1", "linf", "peak_x", "peak_height", "t_st"},
              rows);
  top.files.push_back("sweep.csv");

  // Dtau-band summary: worst L1 per method, plus failures.
  std::ostringstream summary;
  const std::vector<std::pair<std::string, std::pair<double, double>>> bands{
      {"Dtau <= 1", {-1.0, 1.0}}, {"1 < Dtau <= 25", {1.0, 25.0}}, {"Dtau > 25", {25.0, INFINITY}}};
  for (const auto& [label, range] : bands) {
    summary << label << ":";
    for (auto [m, o] : methods) {
      double worst = 0.0;
      int count = 0, bad = 0;
      for (const auto& j : jobs) {
        const double dt = cells[j.cell].D * cells[j.cell].tau;
        if (j.method != m || j.order != o || !(dt > range.first && dt <= range.second)) continue;
        ++count;
        if (std::isfinite(j.l1)) worst = std::max(worst, j.l1);
        else ++bad;
      }
      if (count) summary << "  " << method_label(m, o) << " max L1=" << fmt(worst) << " (" << count << " cells, " << bad
                         << " failed)";
    }
    summary << "\n";
  }
  {
    std::ofstream out(dir / "summary.txt");
    out << summary.str();
  }
  top.files.push_back("summary.txt");
  top.files.push_back("manifest.json");
  top.diagnostics["cells"] = double(cells.size());
  top.diagnostics["runs"] = double(jobs.size());
  write_manifest((dir / "manifest.json").string(), top);
  std::cout << summary.str();
}

void cmd_validate(const std::string& scenario_file, const std::optional<SolveOptions>& opts) {
  const Scenario sc = load_scenario(scenario_file);
  std::cout << "scenario ok: " << (sc.label.empty() ? scenario_file : sc.label) << ", "
            << (sc.model.is_linear() ? "linear" : "nonlinear") << " model, "
            << (sc.noise.is_white() ? "white" : sc.noise.ou() ? "OU" : "custom") << " noise\n";
  if (!opts) return;
  const SolveConfig cfg = opts->config();
  if (cfg.method == Method::exact_linear && !sc.model.is_linear())
    throw UsageError("exact_linear requires a linear model");
  if (cfg.method == Method::white_noise && !sc.noise.is_white())
    throw UsageError("white_noise requires a white-noise kernel");
  if (cfg.method == Method::sct) (void)sct_diffusion(sc);
  if (cfg.method == Method::fox) (void)fox_diffusion(sc);
  if (!cfg.domain && !sc.model.is_linear() && !sc.noise.ou())
    throw ConfigurationError("nonlinear models without an OU kernel need --domain");
  std::cout << "method ok: " << method_label(cfg.method, cfg.vada_order) << "\n";
}

}  // namespace genfpk::cli
