#pragma once

#include <genfpk/genfpk.hpp>

namespace genfpk::testing {

// Linear benchmark: eta1 = -0.8, kappa = 0.2, OU(D = 1, tau = 1) with mean 0.2,
// Gaussian start at -0.7 with sigma 0.15. Ten relaxation times end at t = 12.5.
inline Scenario linear_benchmark(double t_end = 12.5) {
  NoiseSpec noise;
  noise.kernel = OuKernel{1.0, 1.0, OuConvention::plain};
  noise.mean_value = 0.2;
  return Scenario(ModelSpec({{1, -0.8}}, 0.2, 0.0, t_end), noise, InitialSpec(-0.7, 0.15 * 0.15), "linear");
}

inline Scenario linear_ou(double eta1, double kappa, double D, double tau, double t_end,
                          OuConvention conv = OuConvention::plain, InitialSpec init = {0.0, 0.25}) {
  NoiseSpec noise;
  noise.kernel = OuKernel{D, tau, conv};
  return Scenario(ModelSpec({{1, eta1}}, kappa, 0.0, t_end), noise, init);
}

inline Scenario cubic_plain_ou(double D, double tau, double t_end) {
  NoiseSpec noise;
  noise.kernel = OuKernel{D, tau, OuConvention::plain};
  return Scenario(ModelSpec({{1, 1.0}, {3, -1.0}}, 1.0, 0.0, t_end), noise, InitialSpec(0.0, 0.36));
}

inline Scenario white_linear(double eta1, double kappa, double D, double t_end) {
  NoiseSpec noise;
  WhiteNoiseKernel w;
  w.constant = D;
  w.intensity = [D](double) { return D; };
  noise.kernel = w;
  return Scenario(ModelSpec({{1, eta1}}, kappa, 0.0, t_end), noise, InitialSpec(0.0, 0.25));
}

}  // namespace genfpk::testing
