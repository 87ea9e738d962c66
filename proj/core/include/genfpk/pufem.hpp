#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "genfpk/coefficients.hpp"
#include "genfpk/linear_solver.hpp"

namespace genfpk {

/// K overlapping subdomains of length 2h on [omega_min, omega_max],
/// h = (omega_max - omega_min) / (K + 1). Subdomains are indexed 0..K-1.
struct Cover {
  double omega_min = 0.0;
  double omega_max = 0.0;
  int K = 0;
  double h = 0.0;

  double lo(int k) const { return omega_min + k * h; }
  double hi(int k) const { return omega_min + (k + 2) * h; }
};

Cover build_cover(double omega_min, double omega_max, int K);

/// omega in subdomain k to xi in [-1, 1] and back.
double affine_to_ref(const Cover& cover, int k, double omega);
double affine_to_abs(const Cover& cover, int k, double xi);

/// Polynomial g_s(z) = a_0 + sum_i a_i z^{2i-1} with g_s(1) = 1, g_s(-1) = 0,
/// g_s(z) + g_s(-z) = 1 and s - 1 vanishing derivatives at z = +-1.
class PuFunction {
 public:
  explicit PuFunction(int smoothness = 2);

  int smoothness() const noexcept { return s_; }
  const std::vector<double>& coeffs() const noexcept { return a_; }
  double g(double z) const;
  double dg(double z) const;
  /// n-th derivative of g.
  double derivative(double z, int n) const;

 private:
  int s_;
  std::vector<double> a_;
};

/// Mother PU function: g(2 xi + 1) on [-1, 0], g(-2 xi + 1) on [0, 1], 0 outside.
double mother_pu_eval(const PuFunction& pu, double xi);
double mother_pu_deriv(const PuFunction& pu, double xi);

double legendre_eval(int n, double xi);
double legendre_deriv(int n, double xi);

/// Shape functions u_{k,mu}(x) = phi_k(x) P_mu(xi_k(x)), global index k * M + mu.
/// The PU functions of the first and last subdomain are extended by 1 over
/// their outer halves so that sum_k phi_k = 1 on the whole domain.
class PufemSpace {
 public:
  PufemSpace(Cover cover, int smoothness = 2, int basis = 4);

  const Cover& cover() const noexcept { return cover_; }
  const PuFunction& pu() const noexcept { return pu_; }
  int basis() const noexcept { return M_; }
  int dof() const noexcept { return cover_.K * M_; }
  int index(int k, int mu) const { return k * M_ + mu; }
  int subdomain_of(int m) const { return m / M_; }
  int mu_of(int m) const { return m % M_; }
  /// Sub/super diagonal count of every assembled matrix.
  int bandwidth() const noexcept { return 2 * M_ - 1; }

  double pu_value(int k, double x) const;
  double pu_deriv(int k, double x) const;
  double shape(int m, double x) const;
  double shape_dx(int m, double x) const;

  /// Cells [omega_min + c h, omega_min + (c + 1) h], c = 0..K. Each cell
  /// meets at most two subdomains, and the PU pieces are polynomial on it.
  int cells() const noexcept { return cover_.K + 1; }
  struct Cell {
    std::vector<double> x;
    std::vector<double> w;
    std::vector<int> dofs;
    Eigen::MatrixXd val;  ///< quadrature point x local dof
    Eigen::MatrixXd der;
  };
  const Cell& cell(int c) const { return cells_[c]; }
  int quadrature_order() const noexcept { return order_; }
  int cell_of(double x) const;

 private:
  Cover cover_;
  PuFunction pu_;
  int M_;
  int order_;
  std::vector<Cell> cells_;
};

/// f(x, t) ~ sum_m w_m u_m(x).
struct PdfField {
  std::shared_ptr<const PufemSpace> space;
  Eigen::VectorXd weights;
  double t = 0.0;
};

Eigen::MatrixXd assemble_mass(const PufemSpace& space);
Eigen::MatrixXd assemble_stiffness(const PufemSpace& space);

/// a_jm = int (q - B_x) u_m u_j' - int B u_m' u_j'.
Eigen::MatrixXd assemble_system(const PufemSpace& space, const DriftCoefficient& drift,
                                const DiffusionProfile& diffusion, double t);
Eigen::MatrixXd assemble_system(const PufemSpace& space, const DriftCoefficient& drift,
                                const DiffusionCoefficient& diffusion, double t);

/// L2 projection: C w0 = (int f0 u_j)_j.
Eigen::VectorXd fit_initial(const PufemSpace& space, const Eigen::MatrixXd& mass,
                            const std::function<double(double)>& f0);

/// (C - dt/2 A(t+dt)) w+ = (C + dt/2 A(t)) w.
Eigen::VectorXd crank_nicolson_step(const PufemSpace& space, const Eigen::MatrixXd& mass,
                                    const Eigen::MatrixXd& A_t, const Eigen::MatrixXd& A_next,
                                    const Eigen::VectorXd& w, double dt,
                                    LinearBackend backend = LinearBackend::dense, double t = 0.0);

std::vector<double> pdf_eval(const PdfField& field, const std::vector<double>& grid);
double pdf_eval(const PdfField& field, double x);
double pdf_moment(const PdfField& field, const std::function<double(double)>& g);

/// Optional CSV dumps of matrices and weights for debugging.
void dump_matrix_csv(const Eigen::MatrixXd& m, const std::string& path);

}  // namespace genfpk
