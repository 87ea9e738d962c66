#include "genfpk/linear_solver.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "genfpk/errors.hpp"

namespace genfpk {
namespace {

Eigen::VectorXd dense_solve(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, double t, double dt) {
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  const double rcond = lu.rcond();
  if (!(rcond > 1e-15)) {
    std::ostringstream msg;
    msg << "singular Crank-Nicolson system, rcond=" << rcond;
    throw StepFailure(msg.str(), t, dt);
  }
  return lu.solve(b);
}

Eigen::VectorXd banded_solve(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, int bw, double t,
                             double dt) {
  const lapack_int n = static_cast<lapack_int>(A.rows());
  const lapack_int kl = bw;
  const lapack_int ku = bw;
  const lapack_int ldab = 2 * kl + ku + 1;
  // Column-major band storage with kl extra rows for the LU fill-in.
  std::vector<double> ab(static_cast<std::size_t>(ldab) * n, 0.0);
  for (lapack_int j = 0; j < n; ++j) {
    const lapack_int lo = std::max<lapack_int>(0, j - ku);
    const lapack_int hi = std::min<lapack_int>(n - 1, j + kl);
    for (lapack_int i = lo; i <= hi; ++i) ab[j * ldab + (kl + ku + i - j)] = A(i, j);
  }
  std::vector<lapack_int> ipiv(n);
  Eigen::VectorXd x = b;
  const lapack_int info =
      LAPACKE_dgbsv(LAPACK_COL_MAJOR, n, kl, ku, 1, ab.data(), ldab, ipiv.data(), x.data(), n);
  if (info != 0) {
    std::ostringstream msg;
    msg << "banded LU failed, info=" << info;
    throw StepFailure(msg.str(), t, dt);
  }
  if (!x.allFinite()) throw StepFailure("banded LU produced non-finite values", t, dt);
  return x;
}

}  // namespace

Eigen::VectorXd lu_solve(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, LinearBackend backend,
                         int bandwidth, double t, double dt) {
  if (backend == LinearBackend::banded && bandwidth >= 0 && bandwidth < A.rows())
    return banded_solve(A, b, bandwidth, t, dt);
  return dense_solve(A, b, t, dt);
}

}  // namespace genfpk
