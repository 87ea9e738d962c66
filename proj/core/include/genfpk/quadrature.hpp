#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace genfpk {

/// Gauss-Legendre rule on the reference interval [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const noexcept { return nodes.size(); }
};

/// n-point Gauss-Legendre rule, exact for polynomials of degree 2n-1.
/// Rules are computed once per n and cached.
const GaussRule& gauss_legendre(int n);

/// Composite Gauss-Legendre quadrature of f over [a, b] with `panels` equal
/// panels of `order` points each.
double integrate(const std::function<double(double)>& f, double a, double b, int panels,
                 int order = 4);

}  // namespace genfpk
