#include "kmd/cdmd.hpp"

#include <cstdio>

#include "linalg.hpp"

namespace kmd
{

RealMatrix companion_matrix(const RealVector& coefficients)
{
  const auto m = coefficients.size();
  RealMatrix c = RealMatrix::Zero(m, m);
  for (Eigen::Index i = 1; i < m; ++i)
  {
    c(i, i - 1) = 1.0;
  }
  c.col(m - 1) = coefficients;
  return c;
}

CompanionModel companion_model(const RealMatrix& x)
{
  if (x.cols() < 3)
  {
    throw InputError("companion_dmd: need at least 3 snapshots, got " + std::to_string(x.cols()));
  }
  const auto m = x.cols() - 1;
  const RealMatrix krylov = x.leftCols(m);
  const RealVector last = x.col(m);

  CompanionModel model;
  model.coefficients = detail::pinv_solve(krylov, last, kKrylovTolerance, model.krylov_rank);
  model.residual_norm = (last - krylov * model.coefficients).norm();
  if (model.krylov_rank < m)
  {
    model.warnings.push_back("companion_dmd: Krylov matrix has numerical rank " +
                             std::to_string(model.krylov_rank) + " < " + std::to_string(m) +
                             ", using minimum-norm coefficients");
  }
  Eigen::EigenSolver<RealMatrix> eig(companion_matrix(model.coefficients), false);
  if (eig.info() != Eigen::Success)
  {
    throw NumericalError("companion_dmd: eigenvalue computation failed");
  }
  model.companion_eigenvalues = eig.eigenvalues();
  return model;
}

DecompositionResult companion_dmd(const SnapshotMatrix& x)
{
  auto model = companion_model(x.data);
  const auto m = x.cols() - 1;
  const RealMatrix krylov = x.data.leftCols(m);

  Eigen::EigenSolver<RealMatrix> eig(companion_matrix(model.coefficients), true);
  if (eig.info() != Eigen::Success)
  {
    throw NumericalError("companion_dmd: eigendecomposition failed");
  }
  const ComplexVector lambda = eig.eigenvalues();
  ComplexMatrix t = eig.eigenvectors();
  for (Eigen::Index j = 0; j < m; ++j)
  {
    const double n = t.col(j).norm();
    if (n > 0.0)
    {
      t.col(j) /= n;
    }
  }

  DecompositionResult result;
  result.rank = m;
  result.method = Method::Cdmd;
  result.dt_label = x.dt_label;
  result.warnings = std::move(model.warnings);
  result.eigenvector_condition = detail::condition_number(t);
  if (result.eigenvector_condition > kDefectiveCondition)
  {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3e", result.eigenvector_condition);
    result.warnings.push_back(std::string("companion_dmd: companion eigenbasis is nearly defective (condition ") +
                              buf + ")");
  }
  const ComplexMatrix modes = krylov.cast<Complex>() * t;

  result.eigenvalues = lambda;
  result.modes = modes;
  result.original_index.assign(static_cast<std::size_t>(m), 0);
  return fit_amplitudes(order_by_eigenvalue(std::move(result)), krylov);
}

RealVector unit_circle_deviation(const ComplexVector& eigenvalues)
{
  return (eigenvalues.cwiseAbs().array() - 1.0).abs().matrix();
}

} // namespace kmd
