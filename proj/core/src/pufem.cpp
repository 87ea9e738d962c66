#include "genfpk/pufem.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>

#include "genfpk/errors.hpp"
#include "genfpk/quadrature.hpp"

namespace genfpk {

Cover build_cover(double omega_min, double omega_max, int K) {
  if (K < 2) throw ParameterError("build_cover: K must be >= 2");
  if (!(omega_max > omega_min)) throw ParameterError("build_cover: empty domain");
  return Cover{omega_min, omega_max, K, (omega_max - omega_min) / (K + 1)};
}

double affine_to_ref(const Cover& cover, int k, double omega) {
  if (k < 0 || k >= cover.K) throw DomainError("affine_to_ref: subdomain index out of range");
  const double lo = cover.lo(k), hi = cover.hi(k);
  const double tol = 1e-12 * (hi - lo);
  if (omega < lo - tol || omega > hi + tol) throw DomainError("affine_to_ref: point outside subdomain");
  return (2.0 * omega - lo - hi) / (hi - lo);
}

double affine_to_abs(const Cover& cover, int k, double xi) {
  if (k < 0 || k >= cover.K) throw DomainError("affine_to_abs: subdomain index out of range");
  if (std::abs(xi) > 1.0 + 1e-12) throw DomainError("affine_to_abs: xi outside [-1, 1]");
  const double lo = cover.lo(k), hi = cover.hi(k);
  return 0.5 * (lo + hi) + 0.5 * (hi - lo) * xi;
}

PuFunction::PuFunction(int smoothness) : s_(smoothness) {
  switch (smoothness) {
    case 1: a_ = {0.5, 0.5}; break;
    case 2: a_ = {0.5, 0.75, -0.25}; break;
    case 3: a_ = {0.5, 15.0 / 16.0, -5.0 / 8.0, 3.0 / 16.0}; break;
    default: throw ParameterError("PuFunction: smoothness must be 1, 2 or 3");
  }
}

double PuFunction::derivative(double z, int n) const {
  // d^n/dz^n of a_0 + sum_i a_i z^{2i-1}
  double sum = n == 0 ? a_[0] : 0.0;
  for (std::size_t i = 1; i < a_.size(); ++i) {
    const int p = static_cast<int>(2 * i - 1);
    if (p < n) continue;
    double c = a_[i];
    for (int j = 0; j < n; ++j) c *= (p - j);
    sum += c * std::pow(z, p - n);
  }
  return sum;
}

double PuFunction::g(double z) const { return derivative(z, 0); }
double PuFunction::dg(double z) const { return derivative(z, 1); }

double mother_pu_eval(const PuFunction& pu, double xi) {
  if (xi < -1.0 || xi > 1.0) return 0.0;
  return xi <= 0.0 ? pu.g(2.0 * xi + 1.0) : pu.g(-2.0 * xi + 1.0);
}

double mother_pu_deriv(const PuFunction& pu, double xi) {
  if (xi < -1.0 || xi > 1.0) return 0.0;
  return xi <= 0.0 ? 2.0 * pu.dg(2.0 * xi + 1.0) : -2.0 * pu.dg(-2.0 * xi + 1.0);
}

double legendre_eval(int n, double xi) {
  if (n < 0) throw ParameterError("legendre_eval: n must be >= 0");
  if (n == 0) return 1.0;
  double p0 = 1.0, p1 = xi;
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2.0 * k - 1.0) * xi * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

double legendre_deriv(int n, double xi) {
  if (n < 0) throw ParameterError("legendre_deriv: n must be >= 0");
  // P'_n = sum over k = n-1, n-3, ... of (2k + 1) P_k; valid at the endpoints too.
  double d = 0.0;
  for (int k = n - 1; k >= 0; k -= 2) d += (2.0 * k + 1.0) * legendre_eval(k, xi);
  return d;
}

PufemSpace::PufemSpace(Cover cover, int smoothness, int basis)
    : cover_(cover), pu_(smoothness), M_(basis) {
  if (cover_.K < 2) throw ParameterError("PufemSpace: K must be >= 2");
  if (basis < 1) throw ParameterError("PufemSpace: basis count must be >= 1");
  order_ = std::max(2 * M_ + smoothness + 2, 8);
  const GaussRule& rule = gauss_legendre(order_);
  const int Q = static_cast<int>(rule.size());
  cells_.resize(cells());
  for (int c = 0; c < cells(); ++c) {
    Cell& cell = cells_[c];
    const double a = cover_.omega_min + c * cover_.h;
    for (int q = 0; q < Q; ++q) {
      cell.x.push_back(a + 0.5 * cover_.h * (rule.nodes[q] + 1.0));
      cell.w.push_back(0.5 * cover_.h * rule.weights[q]);
    }
    for (int k = c - 1; k <= c; ++k)
      if (k >= 0 && k < cover_.K)
        for (int mu = 0; mu < M_; ++mu) cell.dofs.push_back(index(k, mu));
    const int L = static_cast<int>(cell.dofs.size());
    cell.val.resize(Q, L);
    cell.der.resize(Q, L);
    for (int q = 0; q < Q; ++q)
      for (int l = 0; l < L; ++l) {
        cell.val(q, l) = shape(cell.dofs[l], cell.x[q]);
        cell.der(q, l) = shape_dx(cell.dofs[l], cell.x[q]);
      }
  }
}

double PufemSpace::pu_value(int k, double x) const {
  const double center = cover_.lo(k) + cover_.h;
  const double xi = (x - center) / cover_.h;
  if (k == 0 && xi <= 0.0 && x >= cover_.omega_min) return 1.0;
  if (k == cover_.K - 1 && xi >= 0.0 && x <= cover_.omega_max) return 1.0;
  return mother_pu_eval(pu_, xi);
}

double PufemSpace::pu_deriv(int k, double x) const {
  const double center = cover_.lo(k) + cover_.h;
  const double xi = (x - center) / cover_.h;
  if (k == 0 && xi <= 0.0) return 0.0;
  if (k == cover_.K - 1 && xi >= 0.0) return 0.0;
  return mother_pu_deriv(pu_, xi) / cover_.h;
}

double PufemSpace::shape(int m, double x) const {
  const int k = subdomain_of(m);
  const double phi = pu_value(k, x);
  if (phi == 0.0) return 0.0;
  const double xi = (x - cover_.lo(k) - cover_.h) / cover_.h;
  return phi * legendre_eval(mu_of(m), xi);
}

double PufemSpace::shape_dx(int m, double x) const {
  const int k = subdomain_of(m);
  const double xi = (x - cover_.lo(k) - cover_.h) / cover_.h;
  if (xi < -1.0 || xi > 1.0) return 0.0;
  const int mu = mu_of(m);
  return pu_deriv(k, x) * legendre_eval(mu, xi) +
         pu_value(k, x) * legendre_deriv(mu, xi) / cover_.h;
}

int PufemSpace::cell_of(double x) const {
  const int c = static_cast<int>(std::floor((x - cover_.omega_min) / cover_.h));
  return std::clamp(c, 0, cover_.K);
}

namespace {

void scatter(Eigen::MatrixXd& global, const std::vector<int>& dofs, const Eigen::MatrixXd& local) {
  for (std::size_t i = 0; i < dofs.size(); ++i)
    for (std::size_t j = 0; j < dofs.size(); ++j) global(dofs[i], dofs[j]) += local(i, j);
}

Eigen::Map<const Eigen::VectorXd> as_vector(const std::vector<double>& v) {
  return {v.data(), static_cast<Eigen::Index>(v.size())};
}

}  // namespace

Eigen::MatrixXd assemble_mass(const PufemSpace& space) {
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(space.dof(), space.dof());
  for (int c = 0; c < space.cells(); ++c) {
    const auto& cell = space.cell(c);
    scatter(C, cell.dofs, cell.val.transpose() * as_vector(cell.w).asDiagonal() * cell.val);
  }
  Eigen::LLT<Eigen::MatrixXd> llt(C);
  if (llt.info() != Eigen::Success)
    throw ConfigurationError("assemble_mass: mass matrix is not positive definite");
  return C;
}

Eigen::MatrixXd assemble_stiffness(const PufemSpace& space) {
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(space.dof(), space.dof());
  for (int c = 0; c < space.cells(); ++c) {
    const auto& cell = space.cell(c);
    scatter(S, cell.dofs, cell.der.transpose() * as_vector(cell.w).asDiagonal() * cell.der);
  }
  return S;
}

Eigen::MatrixXd assemble_system(const PufemSpace& space, const DriftCoefficient& drift,
                                const DiffusionProfile& diffusion, double t) {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(space.dof(), space.dof());
  const double shift = drift.shift(t);
  for (int c = 0; c < space.cells(); ++c) {
    const auto& cell = space.cell(c);
    const Eigen::Index Q = static_cast<Eigen::Index>(cell.x.size());
    Eigen::VectorXd adv(Q), dif(Q);
    for (Eigen::Index q = 0; q < Q; ++q) {
      const double x = cell.x[q];
      const double b = diffusion.value(x);
      adv[q] = cell.w[q] * (drift.model().h(x) + shift - diffusion.dx(x));
      dif[q] = cell.w[q] * b;
    }
    // Row j tests with u_j', column m carries u_m.
    const Eigen::MatrixXd local = cell.der.transpose() * adv.asDiagonal() * cell.val -
                                  cell.der.transpose() * dif.asDiagonal() * cell.der;
    scatter(A, cell.dofs, local);
  }
  return A;
}

Eigen::MatrixXd assemble_system(const PufemSpace& space, const DriftCoefficient& drift,
                                const DiffusionCoefficient& diffusion, double t) {
  return assemble_system(space, drift, diffusion.at(t), t);
}

Eigen::VectorXd fit_initial(const PufemSpace& space, const Eigen::MatrixXd& mass,
                            const std::function<double(double)>& f0) {
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(space.dof());
  for (int c = 0; c < space.cells(); ++c) {
    const auto& cell = space.cell(c);
    for (std::size_t q = 0; q < cell.x.size(); ++q) {
      const double fw = cell.w[q] * f0(cell.x[q]);
      for (std::size_t l = 0; l < cell.dofs.size(); ++l) rhs[cell.dofs[l]] += fw * cell.val(q, l);
    }
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(mass);
  if (ldlt.info() != Eigen::Success) throw ConfigurationError("fit_initial: mass matrix factorization failed");
  return ldlt.solve(rhs);
}

Eigen::VectorXd crank_nicolson_step(const PufemSpace& space, const Eigen::MatrixXd& mass,
                                    const Eigen::MatrixXd& A_t, const Eigen::MatrixXd& A_next,
                                    const Eigen::VectorXd& w, double dt, LinearBackend backend,
                                    double t) {
  const Eigen::MatrixXd lhs = mass - 0.5 * dt * A_next;
  const Eigen::VectorXd rhs = mass * w + 0.5 * dt * (A_t * w);
  return lu_solve(lhs, rhs, backend, space.bandwidth(), t, dt);
}

double pdf_eval(const PdfField& field, double x) {
  const PufemSpace& space = *field.space;
  const int c = space.cell_of(x);
  const int k_lo = std::max(c - 1, 0);
  const int k_hi = std::min(c, space.cover().K - 1);
  double f = 0.0;
  for (int k = k_lo; k <= k_hi; ++k)
    for (int mu = 0; mu < space.basis(); ++mu) {
      const int m = space.index(k, mu);
      f += field.weights[m] * space.shape(m, x);
    }
  return f;
}

std::vector<double> pdf_eval(const PdfField& field, const std::vector<double>& grid) {
  std::vector<double> out;
  out.reserve(grid.size());
  for (double x : grid) out.push_back(pdf_eval(field, x));
  return out;
}

double pdf_moment(const PdfField& field, const std::function<double(double)>& g) {
  const PufemSpace& space = *field.space;
  double sum = 0.0;
  for (int c = 0; c < space.cells(); ++c) {
    const auto& cell = space.cell(c);
    for (std::size_t q = 0; q < cell.x.size(); ++q) {
      double f = 0.0;
      for (std::size_t l = 0; l < cell.dofs.size(); ++l) f += field.weights[cell.dofs[l]] * cell.val(q, l);
      sum += cell.w[q] * g(cell.x[q]) * f;
    }
  }
  return sum;
}

void dump_matrix_csv(const Eigen::MatrixXd& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigurationError("cannot open " + path);
  out << std::setprecision(17);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << m(i, j);
    out << '\n';
  }
}

}  // namespace genfpk
