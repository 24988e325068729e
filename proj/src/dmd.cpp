#include "kmd/dmd.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "kmd/spdmd.hpp"
#include "linalg.hpp"

namespace kmd
{

namespace
{

constexpr double kNormalCondLimit = 1e14;
constexpr double kLogTolerance = 1e-12;

std::string format_condition(double c)
{
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3e", c);
  return buf;
}

} // namespace

std::string to_string(Method method)
{
  switch (method)
  {
    case Method::ExactDmd:
      return "exact-dmd";
    case Method::ProjectedDmd:
      return "projected-dmd";
    case Method::Cdmd:
      return "cdmd";
    case Method::Spdmd:
      return "spdmd";
  }
  return "unknown";
}

SvdFactors truncated_svd(const RealMatrix& y, std::optional<Eigen::Index> rank)
{
  if (y.size() == 0)
  {
    throw InputError("truncated_svd: empty matrix");
  }
  const auto max_rank = std::min(y.rows(), y.cols());
  if (rank && (*rank < 1 || *rank > max_rank))
  {
    throw InputError("truncated_svd: rank " + std::to_string(*rank) + " outside [1, " +
                     std::to_string(max_rank) + "]");
  }
  Eigen::BDCSVD<RealMatrix> svd(y, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RealVector& s = svd.singularValues();
  if (s(0) <= 0.0)
  {
    throw NumericalError("truncated_svd: matrix has no positive singular values");
  }
  Eigen::Index r = 0;
  if (rank)
  {
    r = *rank;
  }
  else
  {
    while (r < s.size() && s(r) > kRankTolerance * s(0))
    {
      ++r;
    }
  }
  return {svd.matrixU().leftCols(r), s.head(r), svd.matrixV().leftCols(r), r};
}

DecompositionResult exact_dmd(const SnapshotPair& pair, std::optional<Eigen::Index> rank,
                              ModeStyle style)
{
  if (pair.Y.rows() != pair.Yplus.rows() || pair.Y.cols() != pair.Yplus.cols())
  {
    throw InputError("exact_dmd: Y and Yplus differ in shape");
  }
  const auto svd = truncated_svd(pair.Y, rank);
  const auto r = svd.rank;
  const double zero_floor =
    svd.S(0) * std::numeric_limits<double>::epsilon() *
    static_cast<double>(std::max(pair.Y.rows(), pair.Y.cols()));
  if (svd.S(r - 1) <= zero_floor)
  {
    throw NumericalError("exact_dmd: rank " + std::to_string(r) +
                         " includes a zero singular value; lower the rank");
  }

  // B = Yplus V S^-1, compressed operator Atilde = U^T B.
  const RealMatrix b = (pair.Yplus * svd.V) * svd.S.cwiseInverse().asDiagonal();
  const RealMatrix atilde = svd.U.transpose() * b;

  Eigen::EigenSolver<RealMatrix> eig(atilde, true);
  if (eig.info() != Eigen::Success)
  {
    throw NumericalError("exact_dmd: eigendecomposition of the compressed operator failed");
  }
  ComplexVector lambda = eig.eigenvalues();
  ComplexMatrix w = eig.eigenvectors();
  for (Eigen::Index j = 0; j < r; ++j)
  {
    const double n = w.col(j).norm();
    if (n > 0.0)
    {
      w.col(j) /= n;
    }
  }

  DecompositionResult result;
  result.rank = r;
  result.method = style == ModeStyle::Exact ? Method::ExactDmd : Method::ProjectedDmd;
  result.dt_label = pair.dt_label;
  result.eigenvector_condition = detail::condition_number(w);
  if (result.eigenvector_condition > kDefectiveCondition)
  {
    result.warnings.push_back("exact_dmd: eigenvector matrix is nearly defective (condition " +
                              format_condition(result.eigenvector_condition) + ")");
  }
  const ComplexMatrix modes =
    style == ModeStyle::Exact ? ComplexMatrix(b.cast<Complex>() * w) : ComplexMatrix(svd.U.cast<Complex>() * w);

  result.eigenvalues = lambda;
  result.modes = modes;
  result.original_index.assign(static_cast<std::size_t>(r), 0);
  return order_by_eigenvalue(std::move(result));
}

Vandermonde vandermonde(const ComplexVector& eigenvalues, Eigen::Index m)
{
  if (m < 1)
  {
    throw InputError("vandermonde: need at least one column");
  }
  const auto r = eigenvalues.size();
  Vandermonde out{ComplexMatrix(r, m)};
  for (Eigen::Index i = 0; i < r; ++i)
  {
    Complex v{1.0, 0.0};
    out.data(i, 0) = v;
    for (Eigen::Index k = 1; k < m; ++k)
    {
      v *= eigenvalues(i);
      double re = v.real();
      double im = v.imag();
      if (std::abs(re) < DBL_MIN)
      {
        re = 0.0;
      }
      if (std::abs(im) < DBL_MIN)
      {
        im = 0.0;
      }
      v = Complex{re, im};
      out.data(i, k) = v;
    }
  }
  return out;
}

AmplitudeFit optimal_amplitudes(const RealMatrix& y, const ComplexMatrix& modes,
                                const Vandermonde& xi)
{
  const auto form = quadratic_form(y, modes, xi);
  const auto sol = detail::solve_psd_min_norm(form.P, form.q, kNormalCondLimit);
  AmplitudeFit fit{sol.x, sol.condition, {}};
  if (sol.truncated)
  {
    fit.warnings.push_back("optimal_amplitudes: normal matrix is numerically singular "
                           "(condition " +
                           format_condition(sol.condition) + "), using minimum-norm solution");
  }
  return fit;
}

ModeStats mode_stats(Complex eigenvalue)
{
  if (eigenvalue == Complex{0.0, 0.0})
  {
    throw InputError("mode_stats: eigenvalue is zero");
  }
  const Complex log_lambda = std::log(eigenvalue);
  const double inf = std::numeric_limits<double>::infinity();
  ModeStats stats;
  stats.magnitude = std::abs(eigenvalue);
  stats.e_folding =
    std::abs(log_lambda.real()) < kLogTolerance ? inf : 1.0 / std::abs(log_lambda.real());
  stats.period =
    std::abs(log_lambda.imag()) < kLogTolerance ? inf : 2.0 * std::numbers::pi / log_lambda.imag();
  return stats;
}

std::vector<Eigen::Index> amplitude_order(const DecompositionResult& result)
{
  std::vector<Eigen::Index> order(static_cast<std::size_t>(result.rank));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index c) {
    const double ba = std::abs(result.amplitudes(a));
    const double bc = std::abs(result.amplitudes(c));
    if (ba != bc)
    {
      return ba > bc;
    }
    return result.original_index[static_cast<std::size_t>(a)] <
           result.original_index[static_cast<std::size_t>(c)];
  });
  return order;
}

DecompositionResult take_columns(const DecompositionResult& result,
                                 const std::vector<Eigen::Index>& columns)
{
  DecompositionResult out;
  const auto m = static_cast<Eigen::Index>(columns.size());
  out.rank = m;
  out.method = result.method;
  out.dt_label = result.dt_label;
  out.eigenvector_condition = result.eigenvector_condition;
  out.warnings = result.warnings;
  out.eigenvalues.resize(m);
  out.modes.resize(result.modes.rows(), m);
  out.original_index.resize(columns.size());
  if (result.has_amplitudes())
  {
    out.amplitudes.resize(m);
  }
  for (Eigen::Index j = 0; j < m; ++j)
  {
    const auto src = columns[static_cast<std::size_t>(j)];
    out.eigenvalues(j) = result.eigenvalues(src);
    out.modes.col(j) = result.modes.col(src);
    out.original_index[static_cast<std::size_t>(j)] =
      result.original_index[static_cast<std::size_t>(src)];
    if (result.has_amplitudes())
    {
      out.amplitudes(j) = result.amplitudes(src);
    }
  }
  return out;
}

DecompositionResult order_by_eigenvalue(DecompositionResult result)
{
  std::vector<Eigen::Index> order(static_cast<std::size_t>(result.rank));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index c) {
    return std::abs(result.eigenvalues(a)) > std::abs(result.eigenvalues(c));
  });
  result.original_index.assign(static_cast<std::size_t>(result.rank), 0);
  auto out = take_columns(result, order);
  std::iota(out.original_index.begin(), out.original_index.end(), std::size_t{0});
  return out;
}

DecompositionResult fit_amplitudes(DecompositionResult result, const RealMatrix& y)
{
  if (y.rows() != result.modes.rows())
  {
    throw InputError("fit_amplitudes: data rows differ from mode length");
  }
  const auto xi = vandermonde(result.eigenvalues, y.cols());
  auto fit = optimal_amplitudes(y, result.modes, xi);
  result.amplitudes = std::move(fit.amplitudes);
  result.warnings.insert(result.warnings.end(), fit.warnings.begin(), fit.warnings.end());
  return take_columns(result, amplitude_order(result));
}

double reconstruction_loss_percent(const RealMatrix& y, const DecompositionResult& result)
{
  const double norm_y = y.norm();
  if (norm_y == 0.0)
  {
    throw InputError("reconstruction_loss_percent: data matrix is zero");
  }
  if (result.rank == 0)
  {
    return 100.0;
  }
  const auto xi = vandermonde(result.eigenvalues, y.cols());
  const ComplexMatrix approx = result.modes * result.amplitudes.asDiagonal() * xi.data;
  return 100.0 * (y.cast<Complex>() - approx).norm() / norm_y;
}

} // namespace kmd
