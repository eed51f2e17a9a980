#pragma once

#include <span>
#include <vector>

#include "dcrec/matrix.hpp"

namespace dcrec::linalg {

/// Orthonormal basis (m x n, m >= n) of the column space of `a` by
/// Householder QR. Columns stay orthonormal even when `a` is rank
/// deficient.
Matrix thin_q(const Matrix& a);

struct Svd {
  Matrix u;                    // m x n
  std::vector<double> sigma;   // n, non-increasing
  Matrix v;                    // n x n
};

/// Thin SVD of a tall matrix (m >= n) by one-sided Jacobi rotations.
Svd jacobi_svd(const Matrix& a, double tol = 1e-15, int max_sweeps = 60);

/// Solves (a + damping * I) x = b for symmetric positive (semi)definite a.
/// Throws NumericError if the damped matrix is not positive definite.
std::vector<double> cholesky_solve(Matrix a, std::vector<double> b, double damping);

}  // namespace dcrec::linalg
