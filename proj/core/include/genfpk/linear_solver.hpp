#pragma once

#include <Eigen/Dense>

namespace genfpk {

enum class LinearBackend {
  dense,   ///< Eigen LU with partial pivoting
  banded,  ///< LAPACK gbsv on the band of the matrix
};

/// Solves A x = b by LU with partial pivoting. `bandwidth` is the number of
/// sub/super diagonals used by the banded backend. Throws StepFailure with a
/// reciprocal condition estimate when the matrix is singular.
Eigen::VectorXd lu_solve(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, LinearBackend backend,
                         int bandwidth, double t = 0.0, double dt = 0.0);

}  // namespace genfpk
