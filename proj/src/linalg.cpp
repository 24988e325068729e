#include "linalg.hpp"

#include <limits>

namespace kmd::detail
{

MinNormSolution solve_psd_min_norm(const ComplexMatrix& p, const ComplexVector& q,
                                   double cond_limit)
{
  MinNormSolution out;
  const auto n = p.rows();
  out.x = ComplexVector::Zero(n);
  if (n == 0)
  {
    return out;
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(p);
  if (eig.info() != Eigen::Success)
  {
    throw NumericalError("Hermitian eigensolver failed on the normal matrix");
  }
  const RealVector& mu = eig.eigenvalues(); // ascending
  const double mu_max = mu(n - 1);
  if (mu_max <= 0.0)
  {
    out.condition = std::numeric_limits<double>::infinity();
    out.truncated = true;
    return out;
  }
  const double floor = mu_max / cond_limit;
  out.condition = mu(0) > 0.0 ? mu_max / mu(0) : std::numeric_limits<double>::infinity();
  const ComplexMatrix& v = eig.eigenvectors();
  const ComplexVector coeff = v.adjoint() * q;
  ComplexVector scaled = ComplexVector::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i)
  {
    if (mu(i) > floor)
    {
      scaled(i) = coeff(i) / mu(i);
    }
    else
    {
      out.truncated = true;
    }
  }
  out.x = v * scaled;
  return out;
}

RealVector pinv_solve(const RealMatrix& a, const RealVector& b, double rel_tol,
                      Eigen::Index& rank)
{
  Eigen::BDCSVD<RealMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RealVector& s = svd.singularValues();
  rank = 0;
  if (s.size() == 0 || s(0) <= 0.0)
  {
    return RealVector::Zero(a.cols());
  }
  const double floor = rel_tol * s(0);
  while (rank < s.size() && s(rank) > floor)
  {
    ++rank;
  }
  const RealVector ub = svd.matrixU().leftCols(rank).transpose() * b;
  return svd.matrixV().leftCols(rank) * (ub.array() / s.head(rank).array()).matrix();
}

double condition_number(const ComplexMatrix& m)
{
  if (m.size() == 0)
  {
    return 1.0;
  }
  Eigen::BDCSVD<ComplexMatrix> svd(m);
  const RealVector& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  return smin > 0.0 ? s(0) / smin : std::numeric_limits<double>::infinity();
}

} // namespace kmd::detail
