#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "kmd/snapshots.hpp"
#include "kmd/types.hpp"

namespace kmd
{

/// Rank-r thin SVD, Y ~= U diag(S) V^T, with S strictly positive and
/// non-increasing.
struct SvdFactors
{
  RealMatrix U;
  RealVector S;
  RealMatrix V;
  Eigen::Index rank = 0;
};

enum class Method
{
  ExactDmd,
  ProjectedDmd,
  Cdmd,
  Spdmd,
};

std::string to_string(Method method);

enum class ModeStyle
{
  Exact,     ///< Phi = Yplus V S^-1 W
  Projected, ///< Phi = U W
};

/// Eigenvalues, spatial modes (one per column) and amplitudes of a linear
/// surrogate y_{k+1} = A y_k. Column j of every field refers to the same
/// Koopman tuple. `original_index[j]` is the tuple's position in the
/// |eigenvalue|-descending order the decomposition produced, before any
/// amplitude-based reordering or selection.
struct DecompositionResult
{
  ComplexVector eigenvalues;
  ComplexMatrix modes;
  /// Empty until amplitudes are fitted.
  ComplexVector amplitudes;
  Eigen::Index rank = 0;
  Method method = Method::ExactDmd;
  std::string dt_label;
  std::vector<std::size_t> original_index;
  /// 2-norm condition number of the eigenvector matrix.
  double eigenvector_condition = 1.0;
  Warnings warnings;

  bool has_amplitudes() const { return amplitudes.size() == rank && rank > 0; }
};

/// Entry (i, k) = lambda_i^k, k = 0..M-1, built by repeated multiplication.
struct Vandermonde
{
  ComplexMatrix data;
};

struct AmplitudeFit
{
  ComplexVector amplitudes;
  /// Condition number of the normal matrix P.
  double condition = 1.0;
  Warnings warnings;
};

struct ModeStats
{
  double magnitude = 0.0;
  /// +inf for (numerically) neutral modes.
  double e_folding = 0.0;
  /// Signed; +inf for non-oscillating modes. Negative means clockwise.
  double period = 0.0;
};

/// Singular values at or below this fraction of sigma_1 are treated as zero
/// when no explicit rank is requested.
inline constexpr double kRankTolerance = 1e-10;
/// Eigenvector bases worse conditioned than this are reported.
inline constexpr double kDefectiveCondition = 1e12;

SvdFactors truncated_svd(const RealMatrix& y, std::optional<Eigen::Index> rank = std::nullopt);

/// Exact (or projected) DMD on a snapshot pair. Amplitudes are left empty;
/// columns are ordered by descending |eigenvalue|.
DecompositionResult exact_dmd(const SnapshotPair& pair,
                              std::optional<Eigen::Index> rank = std::nullopt,
                              ModeStyle style = ModeStyle::Exact);

Vandermonde vandermonde(const ComplexVector& eigenvalues, Eigen::Index m);

/// Minimizes ||Y - Phi diag(b) Xi||_F^2 through the normal system P b = q,
/// falling back to the minimum-norm solution when P is numerically singular.
AmplitudeFit optimal_amplitudes(const RealMatrix& y, const ComplexMatrix& modes,
                                const Vandermonde& xi);

ModeStats mode_stats(Complex eigenvalue);

/// Fits amplitudes against `y` (its column k is snapshot k) and reorders
/// the columns by descending |b|, ties broken by ascending original index.
DecompositionResult fit_amplitudes(DecompositionResult result, const RealMatrix& y);

/// Applies a column selection/permutation to every per-tuple field.
DecompositionResult take_columns(const DecompositionResult& result,
                                 const std::vector<Eigen::Index>& columns);

/// Stable sort of the columns by descending |eigenvalue|; original_index is
/// reset to the resulting positions.
DecompositionResult order_by_eigenvalue(DecompositionResult result);

/// Column order sorting by descending |amplitude|, ties by original index.
std::vector<Eigen::Index> amplitude_order(const DecompositionResult& result);

/// Relative Frobenius residual 100 * ||Y - Phi diag(b) Xi|| / ||Y||.
double reconstruction_loss_percent(const RealMatrix& y, const DecompositionResult& result);

} // namespace kmd
