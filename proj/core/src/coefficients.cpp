#include "genfpk/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "genfpk/errors.hpp"
#include "genfpk/quadrature.hpp"

namespace genfpk {
namespace {

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

double binomial(int n, int k) { return factorial(n) / (factorial(k) * factorial(n - k)); }

double ipow(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

double white_intensity(const WhiteNoiseKernel& k, double t) {
  return k.intensity ? k.intensity(t) : k.constant;
}

// Time scale a kernel varies on, used to size quadrature panels.
double kernel_scale(const NoiseSpec& noise) {
  if (const auto* ou = noise.ou()) return 1.0 / ou->rate();
  if (const auto* c = std::get_if<CustomKernel>(&noise.kernel)) return c->memory_time;
  return 1.0;
}

int panel_count(double T, double scale, const QuadratureOptions& opts) {
  const double raw = std::ceil(T / scale * opts.panels_per_scale);
  return static_cast<int>(std::clamp(raw, double(opts.min_panels), double(opts.max_panels)));
}

// Nodes u = t - s and weights w * C(t, s) of the composite rule on [t0, t].
struct LagRule {
  std::vector<double> lag;
  std::vector<double> weight;
};

LagRule lag_rule(const NoiseSpec& noise, double t0, double t, const QuadratureOptions& opts,
                 double extra_rate = 0.0) {
  LagRule out;
  const double T = t - t0;
  if (T <= 0.0) return out;
  double scale = kernel_scale(noise);
  if (extra_rate > 0.0) scale = std::min(scale, 1.0 / extra_rate);
  const int panels = panel_count(T, scale, opts);
  const GaussRule& rule = gauss_legendre(opts.order);
  const double width = T / panels;
  out.lag.reserve(panels * rule.size());
  out.weight.reserve(panels * rule.size());
  for (int p = 0; p < panels; ++p) {
    const double mid = t0 + (p + 0.5) * width;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double s = mid + 0.5 * width * rule.nodes[q];
      out.lag.push_back(t - s);
      out.weight.push_back(0.5 * width * rule.weights[q] * noise.covariance(t, s));
    }
  }
  return out;
}

}  // namespace

DriftCoefficient::DriftCoefficient(const Scenario& scenario)
    : model_(scenario.model), noise_(scenario.noise) {}

double DriftCoefficient::shift(double t) const { return model_.kappa() * noise_.mean(t); }

double DriftCoefficient::operator()(double x, double t) const { return model_.h(x) + shift(t); }

std::string to_string(DiffusionKind kind) {
  switch (kind) {
    case DiffusionKind::linear: return "linear";
    case DiffusionKind::white_noise: return "white_noise";
    case DiffusionKind::sct: return "sct";
    case DiffusionKind::fox: return "fox";
    case DiffusionKind::vada: return "vada";
  }
  return "unknown";
}

DiffusionCoefficient::DiffusionCoefficient(DiffusionKind kind, Factory factory, bool x_independent,
                                           int order)
    : kind_(kind), factory_(std::move(factory)), x_independent_(x_independent), order_(order) {}

double exp_moment(double b, int n, double T) {
  if (n < 0) throw ParameterError("exp_moment: n must be >= 0");
  if (T <= 0.0) return 0.0;
  const double x = b * T;
  if (x == 0.0) return ipow(T, n + 1) / (n + 1);
  if (x < -(n + 4.0)) {
    // n! / (-b)^{n+1} * (1 - e^x sum_{j<=n} (-x)^j / j!)
    double partial = 0.0;
    double term = 1.0;
    for (int j = 0; j <= n; ++j) {
      partial += term;
      term *= -x / (j + 1);
    }
    return factorial(n) / ipow(-b, n + 1) * (1.0 - std::exp(x) * partial);
  }
  if (x > 40.0) {
    double sum = 0.0;
    double coeff = 1.0;  // n! / (n - j)!
    for (int j = 0; j <= n; ++j) {
      const double sign = (j % 2 == 0) ? 1.0 : -1.0;
      sum += sign * coeff * ipow(T, n - j) / ipow(b, j + 1);
      coeff *= (n - j);
    }
    const double tail = ((n % 2 == 0) ? 1.0 : -1.0) * factorial(n) / ipow(b, n + 1);
    return std::exp(x) * sum - tail;
  }
  // T^{n+1} sum_k x^k / (k! (n + k + 1))
  double sum = 0.0;
  double term = 1.0;
  for (int k = 0; k < 400; ++k) {
    const double add = term / (n + k + 1);
    sum += add;
    if (k > std::abs(x) && std::abs(add) <= 1e-17 * std::abs(sum)) break;
    term *= x / (k + 1);
  }
  return ipow(T, n + 1) * sum;
}

double kernel_moment(const NoiseSpec& noise, double t0, double t, double a, int n,
                     const QuadratureOptions& opts) {
  if (n < 0) throw ParameterError("kernel_moment: n must be >= 0");
  const double T = t - t0;
  if (T <= 0.0) return 0.0;
  if (const auto* w = std::get_if<WhiteNoiseKernel>(&noise.kernel))
    return n == 0 ? white_intensity(*w, t) : 0.0;
  if (const auto* ou = noise.ou(); ou && opts.closed_form)
    return ou->zero_lag() * exp_moment(a - ou->rate(), n, T);
  const LagRule rule = lag_rule(noise, t0, t, opts, std::abs(a));
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.lag.size(); ++i)
    sum += rule.weight[i] * std::exp(a * rule.lag[i]) * ipow(rule.lag[i], n);
  return sum;
}

double d_eff_linear(const Scenario& sc, double t, const QuadratureOptions& opts) {
  if (!sc.model.is_linear()) throw UsageError("d_eff_linear: model is not linear");
  const double t0 = sc.model.t0();
  const double k = sc.model.kappa();
  const double eta1 = sc.model.eta(1);
  const double cross = sc.noise.cross_cov(t, t0);
  return k * std::exp(eta1 * (t - t0)) * cross + k * k * kernel_moment(sc.noise, t0, t, eta1, 0, opts);
}

double sct_dn(const Scenario& sc, double t, int n, const QuadratureOptions& opts) {
  if (n != 0 && n != 1) throw UsageError("sct_dn: n must be 0 or 1");
  const double t0 = sc.model.t0();
  const double k = sc.model.kappa();
  const double cross = sc.noise.cross_cov(t, t0);
  return k * cross * ipow(t - t0, n) + k * k * kernel_moment(sc.noise, t0, t, 0.0, n, opts);
}

DiffusionCoefficient linear_diffusion(const Scenario& sc, const QuadratureOptions& opts) {
  if (!sc.model.is_linear()) throw UsageError("exact linear diffusion requires a linear model");
  auto factory = [sc, opts](double t) {
    const double d = d_eff_linear(sc, t, opts);
    return DiffusionProfile{[d](double) { return d; }, [](double) { return 0.0; }};
  };
  return DiffusionCoefficient(DiffusionKind::linear, factory, true);
}

DiffusionCoefficient white_noise_diffusion(const Scenario& sc) {
  const auto* w = std::get_if<WhiteNoiseKernel>(&sc.noise.kernel);
  if (!w) throw UsageError("white-noise diffusion requires a white-noise kernel");
  const double k2 = sc.model.kappa() * sc.model.kappa();
  auto factory = [kernel = *w, k2](double t) {
    const double d = k2 * white_intensity(kernel, t);
    return DiffusionProfile{[d](double) { return d; }, [](double) { return 0.0; }};
  };
  return DiffusionCoefficient(DiffusionKind::white_noise, factory, true);
}

DiffusionCoefficient sct_diffusion(const Scenario& sc, const QuadratureOptions& opts) {
  auto model = std::make_shared<ModelSpec>(sc.model);
  auto factory = [sc, opts, model](double t) {
    const double d0 = sct_dn(sc, t, 0, opts);
    const double d1 = sct_dn(sc, t, 1, opts);
    return DiffusionProfile{[d0, d1, model](double x) { return d0 + d1 * model->h_prime(x); },
                            [d1, model](double x) { return d1 * model->h_second(x); }};
  };
  return DiffusionCoefficient(DiffusionKind::sct, factory, sc.model.is_linear());
}

DiffusionCoefficient fox_diffusion(const Scenario& sc, const QuadratureOptions& opts) {
  auto model = std::make_shared<ModelSpec>(sc.model);
  const double k = sc.model.kappa();
  const double t0 = sc.model.t0();
  auto factory = [sc, opts, model, k, t0](double t) -> DiffusionProfile {
    const double T = t - t0;
    const double cross = k * sc.noise.cross_cov(t, t0);
    if (sc.noise.is_white()) {
      const double d = k * k * kernel_moment(sc.noise, t0, t, 0.0, 0, opts);
      return {[d, cross, model, T](double x) { return cross * std::exp(model->h_prime(x) * T) + d; },
              [cross, model, T](double x) {
                const double a = model->h_prime(x);
                return model->h_second(x) * cross * T * std::exp(a * T);
              }};
    }
    if (const auto* ou = sc.noise.ou(); ou && opts.closed_form) {
      const double amp = k * k * ou->zero_lag();
      const double lambda = ou->rate();
      return {[=](double x) {
                const double a = model->h_prime(x);
                return cross * std::exp(a * T) + amp * exp_moment(a - lambda, 0, T);
              },
              [=](double x) {
                const double a = model->h_prime(x);
                return model->h_second(x) *
                       (cross * T * std::exp(a * T) + amp * exp_moment(a - lambda, 1, T));
              }};
    }
    auto rule = std::make_shared<LagRule>(lag_rule(sc.noise, t0, t, opts));
    return {[=](double x) {
              const double a = model->h_prime(x);
              double sum = 0.0;
              for (std::size_t i = 0; i < rule->lag.size(); ++i)
                sum += rule->weight[i] * std::exp(a * rule->lag[i]);
              return cross * std::exp(a * T) + k * k * sum;
            },
            [=](double x) {
              const double a = model->h_prime(x);
              double sum = 0.0;
              for (std::size_t i = 0; i < rule->lag.size(); ++i)
                sum += rule->weight[i] * rule->lag[i] * std::exp(a * rule->lag[i]);
              return model->h_second(x) * (cross * T * std::exp(a * T) + k * k * sum);
            }};
  };
  return DiffusionCoefficient(DiffusionKind::fox, factory, sc.model.is_linear());
}

SctValidity check_sct_validity(const DiffusionCoefficient& diff, const std::vector<double>& grid,
                               double t) {
  if (diff.kind() != DiffusionKind::sct) throw UsageError("check_sct_validity: not an SCT coefficient");
  const DiffusionProfile profile = diff.at(t);
  SctValidity out;
  out.value = std::numeric_limits<double>::infinity();
  for (double x : grid) {
    const double b = profile.value(x);
    if (b <= 0.0) return {false, x, b};
    if (b < out.value) {
      out.value = b;
      out.x = x;
    }
  }
  return out;
}

MultiIndexTable::MultiIndexTable(int slots, int max_order)
    : slots_(slots), max_order_(max_order), table_(max_order + 1) {
  if (slots < 0 || max_order < 0) throw ParameterError("MultiIndexTable: negative size");
  std::vector<int> alpha(slots, 0);
  // Enumerate compositions of m into `slots` non-negative parts.
  auto fill = [&](auto&& self, int slot, int remaining, int m) -> void {
    if (slot == slots - 1 || slots == 0) {
      if (slots == 0) {
        if (remaining == 0) table_[m].push_back({{}, 1.0});
        return;
      }
      alpha[slot] = remaining;
      double w = 1.0;
      for (int a : alpha) w /= factorial(a);
      table_[m].push_back({alpha, w});
      return;
    }
    for (int a = remaining; a >= 0; --a) {
      alpha[slot] = a;
      self(self, slot + 1, remaining - a, m);
    }
  };
  for (int m = 0; m <= max_order; ++m) fill(fill, 0, m, m);
}

double MultiIndexTable::sum(int m, const std::vector<double>& phi) const {
  if (static_cast<int>(phi.size()) != slots_) throw UsageError("MultiIndexTable: phi size mismatch");
  double total = 0.0;
  for (const auto& e : table_.at(m)) {
    double p = e.weight;
    for (int k = 0; k < slots_; ++k) p *= ipow(phi[k], e.alpha[k]);
    total += p;
  }
  return total;
}

double vada_phi(const ModelSpec& model, int k, double x, double r_gk) {
  const auto degrees = model.nonlinear_degrees();
  if (k < 2 || std::find(degrees.begin(), degrees.end(), k) == degrees.end())
    throw UsageError("vada_phi: degree " + std::to_string(k) + " is not a nonlinear degree of the model");
  return model.eta(k) * (k * ipow(x, k - 1) - r_gk);
}

double vada_exp_factor(const MomentHistory& history, double s, double t) {
  if (s > t) throw UsageError("vada_exp_factor: requires s <= t");
  return std::exp(history.prefix_at(t) - history.prefix_at(s));
}

std::vector<double> vada_dm_eff(const Scenario& sc, const MomentHistory& history, int max_order) {
  if (history.empty()) throw UsageError("vada_dm_eff: empty history");
  if (max_order < 0) throw ParameterError("vada_dm_eff: negative order");
  const double t0 = sc.model.t0();
  if (std::abs(history.front_time() - t0) > 1e-12 * std::max(1.0, std::abs(t0)))
    throw UsageError("vada_dm_eff: history must start at t0");
  const double k = sc.model.kappa();
  const std::size_t n = history.size() - 1;
  const double t = history.time(n);
  const double qt = history.prefix(n);
  const double T = t - t0;

  std::vector<double> dm(max_order + 1, 0.0);
  const double cross = k * std::exp(qt) * sc.noise.cross_cov(t, t0);
  for (int m = 0; m <= max_order; ++m) dm[m] = cross * ipow(T, m);

  if (const auto* w = std::get_if<WhiteNoiseKernel>(&sc.noise.kernel)) {
    if (T > 0.0) dm[0] += k * k * white_intensity(*w, t);
    return dm;
  }
  const GaussRule& rule = gauss_legendre(4);
  std::vector<double> acc(max_order + 1, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const double a = history.time(j);
    const double dt = history.time(j + 1) - a;
    const double r0 = history.r_hprime(j);
    const double r1 = history.r_hprime(j + 1);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double u = 0.5 * dt * (rule.nodes[q] + 1.0);
      const double s = a + u;
      const double qs = history.prefix(j) + u * r0 + 0.5 * u * u * (r1 - r0) / dt;
      const double base = 0.5 * dt * rule.weights[q] * std::exp(qt - qs) * sc.noise.covariance(t, s);
      const double lag = t - s;
      double p = 1.0;
      for (int m = 0; m <= max_order; ++m) {
        acc[m] += base * p;
        p *= lag;
      }
    }
  }
  for (int m = 0; m <= max_order; ++m) dm[m] += k * k * acc[m];
  return dm;
}

double vada_dm_eff(const Scenario& sc, const MomentHistory& history, double t, int m) {
  if (history.empty() || std::abs(history.back_time() - t) > 1e-12 * std::max(1.0, std::abs(t)))
    throw UsageError("vada_dm_eff: history must end at t");
  return vada_dm_eff(sc, history, m).at(m);
}

OuMemory::OuMemory(const Scenario& sc, int max_order)
    : kappa_(sc.model.kappa()),
      t0_(sc.model.t0()),
      cross_(sc.noise.cross_cov),
      max_order_(max_order),
      j_(max_order + 1, 0.0) {
  const auto* ou = sc.noise.ou();
  if (!ou) throw UsageError("OuMemory requires an OU kernel");
  lambda_ = ou->rate();
  amplitude_ = ou->zero_lag();
}

std::vector<double> OuMemory::advance(const MomentHistory& history) const {
  const std::size_t n = history.size() - 1;
  if (n != committed_ + 1) throw UsageError("OuMemory: history is not one node past the committed state");
  const double a = history.time(n - 1);
  const double t = history.time(n);
  const double dt = t - a;
  const double r0 = history.r_hprime(n - 1);
  const double r1 = history.r_hprime(n);
  const double qt = history.prefix(n);
  const double carry = std::exp(qt - history.prefix(n - 1) - lambda_ * dt);

  std::vector<double> out(max_order_ + 1, 0.0);
  for (int m = 0; m <= max_order_; ++m) {
    double s = 0.0;
    for (int j = 0; j <= m; ++j) s += binomial(m, j) * ipow(dt, m - j) * j_[j];
    out[m] = carry * s;
  }
  const GaussRule& rule = gauss_legendre(4);
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const double u = 0.5 * dt * (rule.nodes[q] + 1.0);
    const double qs = history.prefix(n - 1) + u * r0 + 0.5 * u * u * (r1 - r0) / dt;
    const double lag = dt - u;
    const double base = 0.5 * dt * rule.weights[q] * std::exp(qt - qs - lambda_ * lag);
    double p = 1.0;
    for (int m = 0; m <= max_order_; ++m) {
      out[m] += base * p;
      p *= lag;
    }
  }
  return out;
}

std::vector<double> OuMemory::evaluate(const MomentHistory& history) const {
  if (history.empty()) throw UsageError("OuMemory: empty history");
  const std::size_t n = history.size() - 1;
  const std::vector<double> j = (n == committed_) ? j_ : advance(history);
  const double t = history.time(n);
  const double T = t - t0_;
  const double cross = kappa_ * std::exp(history.prefix(n)) * cross_(t, t0_);
  std::vector<double> dm(max_order_ + 1);
  for (int m = 0; m <= max_order_; ++m)
    dm[m] = cross * ipow(T, m) + kappa_ * kappa_ * amplitude_ * j[m];
  return dm;
}

void OuMemory::commit(const MomentHistory& history) {
  const std::size_t n = history.size() - 1;
  if (n == committed_) return;
  j_ = advance(history);
  committed_ = n;
}

namespace {

struct VadaState {
  MultiIndexTable table;
  std::vector<int> degrees;
  std::vector<double> etas;
  std::vector<double> dm;
  std::vector<double> r;

  void phis(double x, std::vector<double>& phi, std::vector<double>& dphi) const {
    for (std::size_t i = 0; i < degrees.size(); ++i) {
      const int k = degrees[i];
      phi[i] = etas[i] * (k * ipow(x, k - 1) - r[i]);
      dphi[i] = etas[i] * k * (k - 1) * ipow(x, k - 2);
    }
  }

  double value(double x) const {
    const std::size_t N = degrees.size();
    std::vector<double> phi(N), dphi(N);
    phis(x, phi, dphi);
    double b = 0.0;
    for (int m = 0; m <= table.max_order(); ++m)
      if (dm[m] != 0.0) b += dm[m] * table.sum(m, phi);
    return b;
  }

  double dx(double x) const {
    const std::size_t N = degrees.size();
    if (N == 0) return 0.0;
    std::vector<double> phi(N), dphi(N);
    phis(x, phi, dphi);
    double d = 0.0;
    for (int m = 1; m <= table.max_order(); ++m) {
      if (dm[m] == 0.0) continue;
      double inner = 0.0;
      for (const auto& e : table.order(m)) {
        for (std::size_t k = 0; k < N; ++k) {
          if (e.alpha[k] == 0) continue;
          double p = e.weight * e.alpha[k] * ipow(phi[k], e.alpha[k] - 1) * dphi[k];
          for (std::size_t l = 0; l < N; ++l)
            if (l != k) p *= ipow(phi[l], e.alpha[l]);
          inner += p;
        }
      }
      d += dm[m] * inner;
    }
    return d;
  }
};

}  // namespace

DiffusionCoefficient vada_diffusion(const Scenario& sc, int M, std::vector<double> dm_eff,
                                    std::vector<double> r_gk, bool allow_odd) {
  if (M < 0) throw ConfigurationError("VADA order must be >= 0");
  if (M % 2 != 0 && !allow_odd)
    throw ConfigurationError("VADA order " + std::to_string(M) +
                             " is odd; odd truncations can make the diffusion negative. "
                             "Pass allow_odd to override.");
  if (static_cast<int>(dm_eff.size()) != M + 1)
    throw UsageError("vada_diffusion: expected M + 1 effective intensities");
  const auto degrees = sc.model.nonlinear_degrees();
  if (r_gk.size() != degrees.size())
    throw UsageError("vada_diffusion: moment vector does not match the nonlinear degrees");
  std::vector<double> etas;
  for (int k : degrees) etas.push_back(sc.model.eta(k));
  auto state = std::make_shared<const VadaState>(VadaState{MultiIndexTable(static_cast<int>(degrees.size()), M),
                                                           degrees, std::move(etas), std::move(dm_eff),
                                                           std::move(r_gk)});
  auto factory = [state](double) {
    return DiffusionProfile{[state](double x) { return state->value(x); },
                            [state](double x) { return state->dx(x); }};
  };
  return DiffusionCoefficient(DiffusionKind::vada, factory, degrees.empty() || M == 0, M);
}

DiffusionCoefficient vada_diffusion(const Scenario& sc, int M, const MomentHistory& history,
                                    bool allow_odd) {
  if (history.empty()) throw UsageError("vada_diffusion: empty history");
  return vada_diffusion(sc, M, vada_dm_eff(sc, history, std::max(M, 0)),
                        history.r_gk(history.size() - 1), allow_odd);
}

}  // namespace genfpk
