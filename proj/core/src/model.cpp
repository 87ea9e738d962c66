#include "genfpk/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "genfpk/errors.hpp"

namespace genfpk {

ModelSpec::ModelSpec(std::vector<Monomial> terms, double kappa, double t0, double t_end)
    : terms_(std::move(terms)), kappa_(kappa), t0_(t0), t_end_(t_end) {
  std::set<int> seen;
  for (const auto& term : terms_) {
    if (term.degree < 1) throw ParameterError("ModelSpec: degrees must be >= 1");
    if (!seen.insert(term.degree).second)
      throw ParameterError("ModelSpec: duplicate degree " + std::to_string(term.degree));
  }
  if (!seen.contains(1)) throw ParameterError("ModelSpec: the linear term (degree 1) is required");
  if (!(t_end_ > t0_)) throw ParameterError("ModelSpec: t_end must exceed t0");
  std::sort(terms_.begin(), terms_.end(),
            [](const Monomial& a, const Monomial& b) { return a.degree < b.degree; });
}

double ModelSpec::eta(int degree) const noexcept {
  for (const auto& term : terms_)
    if (term.degree == degree) return term.coeff;
  return 0.0;
}

bool ModelSpec::is_linear() const noexcept {
  return std::all_of(terms_.begin(), terms_.end(),
                     [](const Monomial& m) { return m.degree == 1 || m.coeff == 0.0; });
}

std::vector<int> ModelSpec::nonlinear_degrees() const {
  std::vector<int> out;
  for (const auto& term : terms_)
    if (term.degree >= 2) out.push_back(term.degree);
  return out;
}

double ModelSpec::h(double x) const noexcept {
  double sum = 0.0;
  for (const auto& term : terms_) sum += term.coeff * std::pow(x, term.degree);
  return sum;
}

double ModelSpec::h_prime(double x) const noexcept {
  double sum = 0.0;
  for (const auto& term : terms_) sum += term.degree * term.coeff * std::pow(x, term.degree - 1);
  return sum;
}

double ModelSpec::h_second(double x) const noexcept {
  double sum = 0.0;
  for (const auto& term : terms_)
    if (term.degree >= 2)
      sum += term.degree * (term.degree - 1) * term.coeff * std::pow(x, term.degree - 2);
  return sum;
}

double h_eval(const ModelSpec& model, double x) { return model.h(x); }
double h_prime_eval(const ModelSpec& model, double x) { return model.h_prime(x); }

double OuKernel::rate() const {
  if (!(D > 0.0) || !(tau > 0.0)) throw ParameterError("OU kernel: D and tau must be positive");
  return convention == OuConvention::scaled ? 2.0 / tau : 1.0 / tau;
}

double OuKernel::operator()(double t, double s) const {
  return zero_lag() * std::exp(-rate() * std::abs(t - s));
}

double ou_kernel(double D, double tau, OuConvention convention, double t, double s) {
  return OuKernel{D, tau, convention}(t, s);
}

double CrossCovariance::operator()(double t, double t0) const {
  switch (kind) {
    case Kind::zero:
      return 0.0;
    case Kind::exp:
      return amplitude * std::exp(-(t - t0) / tau);
    case Kind::custom:
      return fn(t);
  }
  return 0.0;
}

double NoiseSpec::covariance(double t, double s) const {
  return std::visit(
      [&](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, OuKernel>) {
          return k(t, s);
        } else if constexpr (std::is_same_v<K, CustomKernel>) {
          return k.fn(t, s);
        } else {
          throw UsageError("white-noise kernel has no pointwise covariance");
        }
      },
      kernel);
}

InitialSpec::InitialSpec(double mean_, double variance_) : mean(mean_), variance(variance_) {
  if (!(variance > 0.0)) throw ParameterError("InitialSpec: variance must be positive");
}

double InitialSpec::stddev() const { return std::sqrt(variance); }

double InitialSpec::density(double x) const {
  const double z = x - mean;
  return std::exp(-0.5 * z * z / variance) / std::sqrt(2.0 * std::numbers::pi * variance);
}

Scenario::Scenario(ModelSpec model_, NoiseSpec noise_, InitialSpec init_, std::string label_)
    : model(std::move(model_)), noise(std::move(noise_)), init(init_), label(std::move(label_)) {
  if (const auto* ou = noise.ou(); ou && (!(ou->D > 0.0) || !(ou->tau > 0.0)))
    throw ParameterError("Scenario: OU intensity and correlation time must be positive");
}

BistableScaling bistable_scaling(double eta1, double eta3, double kappa, double D_ou,
                                 double tau_cor) {
  if (!(eta1 > 0.0) || !(eta3 < 0.0))
    throw ParameterError("bistable scaling requires eta1 > 0 and eta3 < 0");
  if (!(D_ou > 0.0) || !(tau_cor > 0.0))
    throw ParameterError("bistable scaling requires positive D and tau");
  BistableScaling s{};
  s.tau = 2.0 * eta1 * tau_cor;
  s.D = 2.0 * kappa * kappa * D_ou * std::abs(eta3) / (eta1 * eta1);
  s.time_scale = eta1;
  s.state_scale = std::sqrt(std::abs(eta3) / eta1);
  return s;
}

Scenario nondimensionalize_bistable(double eta1, double eta3, double kappa, double D_ou,
                                    double tau_cor, InitialSpec init, double t0, double t_end) {
  const BistableScaling s = bistable_scaling(eta1, eta3, kappa, D_ou, tau_cor);
  ModelSpec model({{1, 1.0}, {3, -1.0}}, 1.0, s.time_scale * t0, s.time_scale * t_end);
  NoiseSpec noise;
  noise.kernel = OuKernel{s.D, s.tau, OuConvention::scaled};
  InitialSpec scaled_init(init.mean * s.state_scale,
                          init.variance * s.state_scale * s.state_scale);
  return Scenario(std::move(model), std::move(noise), scaled_init, "bistable");
}

Scenario bistable_scenario(double D, double tau, double init_sigma, double t_end) {
  ModelSpec model({{1, 1.0}, {3, -1.0}}, 1.0, 0.0, t_end);
  NoiseSpec noise;
  noise.kernel = OuKernel{D, tau, OuConvention::scaled};
  return Scenario(std::move(model), std::move(noise), InitialSpec(0.0, init_sigma * init_sigma),
                  "bistable D=" + std::to_string(D) + " tau=" + std::to_string(tau));
}

}  // namespace genfpk
