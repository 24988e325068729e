#pragma once

#include "kmd/types.hpp"

namespace kmd::detail
{

struct MinNormSolution
{
  ComplexVector x;
  double condition = 1.0;
  bool truncated = false;
};

/// Solves P x = q for Hermitian positive semidefinite P. Eigen-directions
/// with eigenvalue <= max_eig / cond_limit are dropped, which yields the
/// minimum-norm least-squares solution on singular systems.
MinNormSolution solve_psd_min_norm(const ComplexMatrix& p, const ComplexVector& q,
                                   double cond_limit);

/// Moore-Penrose pseudoinverse of a real matrix applied to a right-hand
/// side; singular values <= rel_tol * sigma_1 are discarded. Returns the
/// number of retained singular values through `rank`.
RealVector pinv_solve(const RealMatrix& a, const RealVector& b, double rel_tol,
                      Eigen::Index& rank);

/// 2-norm condition number of a square complex matrix.
double condition_number(const ComplexMatrix& m);

} // namespace kmd::detail
