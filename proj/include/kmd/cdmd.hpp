#pragma once

#include "kmd/dmd.hpp"
#include "kmd/snapshots.hpp"
#include "kmd/types.hpp"

namespace kmd
{

/// Least-squares companion fit of the last snapshot against the Krylov
/// sequence x_0 .. x_{N-2}: x_{N-1} ~= sum_j c_j x_j.
struct CompanionModel
{
  RealVector coefficients;
  double residual_norm = 0.0;
  ComplexVector companion_eigenvalues;
  /// Numerical rank of [x_0 .. x_{N-2}].
  Eigen::Index krylov_rank = 0;
  Warnings warnings;
};

/// Singular values of the Krylov matrix below this fraction of sigma_1 are
/// discarded in the coefficient solve.
inline constexpr double kKrylovTolerance = 1e-10;

/// (M x M) matrix with ones on the subdiagonal and `coefficients` in the last
/// column; its characteristic polynomial is z^M - sum_j c_j z^j.
RealMatrix companion_matrix(const RealVector& coefficients);

/// Columns of `x` are the snapshot sequence (N >= 3).
CompanionModel companion_model(const RealMatrix& x);

/// Companion-based DMD: modes [x_0 .. x_{N-2}] T from the companion
/// eigenvectors T, amplitudes fitted against the same snapshots.
DecompositionResult companion_dmd(const SnapshotMatrix& x);

/// ||lambda_i| - 1| for each eigenvalue.
RealVector unit_circle_deviation(const ComplexVector& eigenvalues);

} // namespace kmd
