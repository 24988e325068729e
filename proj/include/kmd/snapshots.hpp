#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "kmd/types.hpp"

namespace kmd
{

struct GridShape
{
  std::size_t n_lat = 0;
  std::size_t n_lon = 0;

  std::size_t size() const { return n_lat * n_lon; }
  bool operator==(const GridShape&) const = default;
};

/// Observable snapshots, one column per time step, one row per retained
/// spatial point. When the rows were produced by stacking c consecutive
/// snapshots, `cycle` records c and each column holds c blocks of the base
/// spatial layout.
struct SnapshotMatrix
{
  RealMatrix data;
  std::optional<GridShape> grid;
  /// Retained (sea) points over the full grid, row-major over (lat, lon).
  std::optional<std::vector<bool>> mask;
  std::string dt_label = "step";
  std::size_t cycle = 1;
  Warnings warnings;

  Eigen::Index rows() const { return data.rows(); }
  Eigen::Index cols() const { return data.cols(); }

  /// Number of spatial points in one (unstacked) snapshot.
  std::size_t base_points() const;

  /// Throws InputError when N < 2, when any entry is non-finite, or when
  /// the grid/mask/cycle metadata disagree with the row count.
  void validate() const;
};

/// Consecutive-snapshot matrices: Y holds columns 0..N-2 and Yplus columns
/// 1..N-1 of the source.
struct SnapshotPair
{
  RealMatrix Y;
  RealMatrix Yplus;
  std::string dt_label;
};

enum class MatrixFormat
{
  Csv,
  RawFloat64,
};

struct LoadOptions
{
  MatrixFormat format = MatrixFormat::Csv;
  std::optional<GridShape> grid;
  bool header = false;
  bool transpose = false;
  std::string dt_label = "step";
};

/// Sidecar JSON describing a raw-float64 payload: `<payload>.json`.
std::filesystem::path raw_header_path(const std::filesystem::path& payload);

/// Loads a snapshot matrix. Non-finite entries are accepted here so that a
/// later mask can remove them; call validate() before decomposing.
SnapshotMatrix load_matrix(const std::filesystem::path& path, const LoadOptions& options = {});

/// Column-major little-endian payload plus its JSON sidecar.
void write_raw_float64(const std::filesystem::path& path, const RealMatrix& m);

/// CSV with 17 significant digits per value.
void write_csv(const std::filesystem::path& path, const RealMatrix& m);

/// Reads a 0/1 CSV mask (any layout; values are taken in reading order).
std::vector<bool> load_mask(const std::filesystem::path& path);

SnapshotMatrix apply_mask(const SnapshotMatrix& x, const std::vector<bool>& mask);

/// Stacks c consecutive snapshots into one column; trailing columns beyond
/// c*floor(N/c) are dropped and reported in the result's warnings.
SnapshotMatrix stack_cycles(const SnapshotMatrix& x, std::size_t c);

/// Inverse of stack_cycles for the retained columns.
SnapshotMatrix unstack_cycles(const SnapshotMatrix& x);

SnapshotPair build_pairs(const SnapshotMatrix& x);

struct CenteredSnapshots
{
  SnapshotMatrix centered;
  RealVector mean;
};

CenteredSnapshots subtract_mean(const SnapshotMatrix& x);

} // namespace kmd
