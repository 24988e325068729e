#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "kmd/dmd.hpp"
#include "kmd/snapshots.hpp"
#include "kmd/spdmd.hpp"

namespace kmd::cli
{

inline constexpr const char* kToolkitVersion = "1.0.0";

/// Bad flags or flag combinations; maps to exit status 1.
class UsageError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

enum class Command
{
  IngestInfo,
  Decompose,
  Sweep,
  Reconstruct,
};

enum class DecompositionMethod
{
  Dmd,
  Cdmd,
  Spdmd,
};

struct RunConfig
{
  std::filesystem::path input;
  MatrixFormat format = MatrixFormat::Csv;
  std::optional<GridShape> grid;
  std::optional<std::filesystem::path> mask;
  std::size_t cycle = 1;
  DecompositionMethod method = DecompositionMethod::Dmd;
  std::optional<Eigen::Index> rank;
  ModeStyle mode_style = ModeStyle::Exact;
  double gamma_min = 1e-3;
  double gamma_max = 1e3;
  std::size_t gamma_count = 50;
  AdmmParams solver;
  bool warm_start = true;
  std::filesystem::path output_dir;
  bool subtract_mean = false;
  bool transpose = false;
  bool header = false;
  bool pair_collapse = false;
  bool mean_over_cycle = false;
  std::string dt_label = "step";

  // reconstruct only
  std::filesystem::path model_dir;
  std::size_t horizon = 0;
  std::vector<std::size_t> indices;

  /// Throws UsageError when the configuration cannot drive `command`.
  void validate(Command command) const;
  nlohmann::json to_json() const;
};

/// Snapshots after loading, masking, stacking and optional centering.
struct PreparedData
{
  SnapshotMatrix snapshots;
  /// Row means removed when centering; empty otherwise.
  RealVector mean;
  std::size_t input_rows = 0;
  std::size_t input_cols = 0;
};

PreparedData prepare_data(const RunConfig& config);

/// Decomposition with fitted amplitudes for the configured method.
DecompositionResult run_decomposition(const RunConfig& config, const SnapshotMatrix& x);

/// Files produced by a command, keyed by path relative to the output
/// directory. Nothing touches the disk until commit().
class ArtifactSet
{
public:
  void add(const std::filesystem::path& relative, std::string contents);
  /// Writes every file; on failure removes the ones already written and
  /// rethrows.
  void commit(const std::filesystem::path& output_dir) const;
  const std::map<std::filesystem::path, std::string>& files() const { return files_; }

private:
  std::map<std::filesystem::path, std::string> files_;
};

ArtifactSet decompose_artifacts(const RunConfig& config);
ArtifactSet sweep_artifacts(const RunConfig& config);
ArtifactSet reconstruct_artifacts(const RunConfig& config);

void cmd_ingest_info(const RunConfig& config, std::ostream& out);
void cmd_decompose(const RunConfig& config);
void cmd_sweep(const RunConfig& config);
void cmd_reconstruct(const RunConfig& config);
void cmd_heatmap(const std::filesystem::path& grid_csv, const std::filesystem::path& out);

/// Binary PPM (P6): linear grayscale from the grid minimum (black) to its
/// maximum (white); NaN cells are drawn in kNanColor.
std::string render_ppm(const RealMatrix& grid);

struct Rgb
{
  unsigned char r, g, b;
};
inline constexpr Rgb kNanColor{255, 0, 255};

/// Full CLI entry point. Returns 0 on success, 1 on usage errors and 2 on
/// runtime failures.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace kmd::cli
