#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "kmd/dmd.hpp"
#include "kmd/snapshots.hpp"
#include "kmd/types.hpp"

namespace kmd
{

/// One (eigenvalue, spatial mode, amplitude) triple. The amplitude stands
/// in for the eigenfunction value at the initial state.
struct KoopmanTuple
{
  Complex eigenvalue;
  ComplexVector mode;
  Complex amplitude;
  double magnitude = 0.0;
  double e_folding = 0.0;
  double period = 0.0;
  std::size_t original_index = 0;
};

struct ReducedOrderModel
{
  /// Sorted by descending |amplitude|.
  std::vector<KoopmanTuple> tuples;
  Eigen::Index spatial_dim = 0;
  std::string dt_label;

  std::size_t size() const { return tuples.size(); }
};

/// Builds the model from a decomposition with fitted amplitudes.
ReducedOrderModel make_model(const DecompositionResult& result);

/// lambda^k by repeated squaring.
Complex integer_power(Complex lambda, std::size_t k);

struct Reconstruction
{
  RealVector values;
  /// ||Im|| / ||Re|| of the complex sum (||Im|| when the real part vanishes).
  double imaginary_residual = 0.0;
};

/// Re(sum_j mode_j lambda_j^k b_j).
Reconstruction reconstruct(const ReducedOrderModel& model, std::size_t k);

struct TemporalDynamics
{
  std::vector<std::size_t> times;
  /// Model tuple index behind each row.
  std::vector<std::size_t> tuple_index;
  /// One row per retained tuple, one column per time.
  RealMatrix values;
};

/// Rows Re(lambda_j^t b_j) for t in [t_begin, t_end). With `collapse_pairs`,
/// a conjugate pair is shown once (the member with positive imaginary part)
/// and its row carries the pair's combined real contribution.
TemporalDynamics temporal_dynamics(const ReducedOrderModel& model, std::size_t t_begin,
                                   std::size_t t_end, bool collapse_pairs = false);

struct Forecast
{
  RealMatrix values;
  Warnings warnings;
};

/// Reconstructions at k = n_train .. n_train + horizon - 1. Overflowing
/// entries saturate at +-DBL_MAX with a warning.
Forecast forecast(const ReducedOrderModel& model, std::size_t horizon, std::size_t n_train);

/// Spatial layout of one column of a (possibly masked and cycle-stacked)
/// snapshot matrix.
struct GridLayout
{
  GridShape grid;
  std::optional<std::vector<bool>> mask;
  std::size_t cycle = 1;

  static GridLayout from(const SnapshotMatrix& x);
  std::size_t base_points() const;
};

enum class ModeComponent
{
  Abs,
  Real,
  Imag,
};

/// Reshapes one mode component onto (n_lat, n_lon) grids, one per
/// intra-cycle slot (or their mean when `mean_over_cycle`). Masked-out
/// cells hold NaN.
std::vector<RealMatrix> mode_grids(const ComplexVector& mode, const GridLayout& layout,
                                   ModeComponent component = ModeComponent::Abs,
                                   bool mean_over_cycle = false);

inline std::vector<RealMatrix> mode_magnitude_grid(const KoopmanTuple& tuple, const GridLayout& layout,
                                                   bool mean_over_cycle = false)
{
  return mode_grids(tuple.mode, layout, ModeComponent::Abs, mean_over_cycle);
}

} // namespace kmd
