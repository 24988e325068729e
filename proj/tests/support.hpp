#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kmd/types.hpp"

namespace kmd::test
{

using Rng = std::mt19937_64;

inline RealMatrix random_real(Eigen::Index rows, Eigen::Index cols, Rng& rng)
{
  std::normal_distribution<double> n(0.0, 1.0);
  RealMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i)
  {
    m.data()[i] = n(rng);
  }
  return m;
}

inline ComplexMatrix random_complex(Eigen::Index rows, Eigen::Index cols, Rng& rng)
{
  ComplexMatrix m(rows, cols);
  m.real() = random_real(rows, cols, rng);
  m.imag() = random_real(rows, cols, rng);
  return m;
}

inline double uniform(Rng& rng, double lo, double hi)
{
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// y_k = Re(sum_j b_j lambda_j^k w_j) for k = 0..n-1, powers via std::pow.
inline RealMatrix oscillatory_series(const std::vector<Complex>& lambdas, const ComplexMatrix& w,
                                     const std::vector<Complex>& b, Eigen::Index n)
{
  RealMatrix y = RealMatrix::Zero(w.rows(), n);
  for (Eigen::Index k = 0; k < n; ++k)
  {
    for (std::size_t j = 0; j < lambdas.size(); ++j)
    {
      const Complex c = b[j] * std::pow(lambdas[j], static_cast<double>(k));
      y.col(k) += (w.col(static_cast<Eigen::Index>(j)) * c).real();
    }
  }
  return y;
}

/// Direct Frobenius objective ||Y - Phi diag(b) Xi||_F^2, with Xi built by
/// std::pow rather than recursive products.
inline double direct_objective(const RealMatrix& y, const ComplexMatrix& phi, const std::vector<Complex>& lambdas,
                               const ComplexVector& b)
{
  ComplexMatrix approx = ComplexMatrix::Zero(y.rows(), y.cols());
  for (Eigen::Index k = 0; k < y.cols(); ++k)
  {
    for (Eigen::Index j = 0; j < phi.cols(); ++j)
    {
      approx.col(k) += phi.col(j) * (b(j) * std::pow(lambdas[static_cast<std::size_t>(j)], static_cast<double>(k)));
    }
  }
  return (y.cast<Complex>() - approx).squaredNorm();
}

/// Distance from each value in `expected` to its nearest member of `got`.
inline double max_nearest_distance(const std::vector<Complex>& expected, const ComplexVector& got)
{
  double worst = 0.0;
  for (const auto& e : expected)
  {
    double best = INFINITY;
    for (Eigen::Index i = 0; i < got.size(); ++i)
    {
      best = std::min(best, std::abs(got(i) - e));
    }
    worst = std::max(worst, best);
  }
  return worst;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name)
{
  auto dir = std::filesystem::temp_directory_path() / ("kmd_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Dictionary of `count` real decaying modes used by the planted-support
/// tests: orthonormal spatial modes and distinct real eigenvalues in
/// (0.5, 0.99).
struct RealDictionary
{
  ComplexMatrix modes;
  std::vector<Complex> eigenvalues;
};

inline RealDictionary real_dictionary(Eigen::Index p, Eigen::Index count, Rng& rng)
{
  const RealMatrix q = Eigen::HouseholderQR<RealMatrix>(random_real(p, count, rng)).householderQ() *
                       RealMatrix::Identity(p, count);
  RealDictionary d;
  d.modes = q.cast<Complex>();
  for (Eigen::Index j = 0; j < count; ++j)
  {
    d.eigenvalues.push_back(0.99 - 0.49 * static_cast<double>(j) / static_cast<double>(std::max<Eigen::Index>(count - 1, 1)));
  }
  return d;
}

/// Y = Phi diag(b) Xi for the dictionary (real data by construction).
inline RealMatrix dictionary_data(const RealDictionary& d, const std::vector<double>& b, Eigen::Index n)
{
  RealMatrix y = RealMatrix::Zero(d.modes.rows(), n);
  for (Eigen::Index k = 0; k < n; ++k)
  {
    for (Eigen::Index j = 0; j < d.modes.cols(); ++j)
    {
      y.col(k) += d.modes.col(j).real() * (b[static_cast<std::size_t>(j)] *
                                           std::pow(d.eigenvalues[static_cast<std::size_t>(j)].real(), static_cast<double>(k)));
    }
  }
  return y;
}

} // namespace kmd::test
