#include "kmd/snapshots.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "kmd/io.hpp"

namespace kmd
{

namespace
{

std::size_t count_true(const std::vector<bool>& mask)
{
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true));
}

void require_columns(Eigen::Index n)
{
  if (n < 2)
  {
    throw InputError("snapshot matrix needs at least 2 columns, got " + std::to_string(n));
  }
}

} // namespace

std::size_t SnapshotMatrix::base_points() const
{
  if (mask)
  {
    return count_true(*mask);
  }
  if (grid)
  {
    return grid->size();
  }
  return static_cast<std::size_t>(data.rows()) / std::max<std::size_t>(cycle, 1);
}

void SnapshotMatrix::validate() const
{
  require_columns(data.cols());
  if (data.rows() == 0)
  {
    throw InputError("snapshot matrix has no rows");
  }
  if (cycle == 0 || static_cast<std::size_t>(data.rows()) % cycle != 0)
  {
    throw InputError("row count is not a multiple of the stacking cycle");
  }
  if (!data.allFinite())
  {
    throw InputError("snapshot matrix contains NaN/Inf entries outside the mask");
  }
  if (mask && grid && mask->size() != grid->size())
  {
    throw InputError("mask length does not match the grid size");
  }
  if (grid || mask)
  {
    if (base_points() * cycle != static_cast<std::size_t>(data.rows()))
    {
      throw InputError("row count " + std::to_string(data.rows()) +
                       " does not match grid/mask metadata (" +
                       std::to_string(base_points()) + " points x cycle " +
                       std::to_string(cycle) + ")");
    }
  }
}

std::filesystem::path raw_header_path(const std::filesystem::path& payload)
{
  auto p = payload;
  p += ".json";
  return p;
}

SnapshotMatrix load_matrix(const std::filesystem::path& path, const LoadOptions& options)
{
  if (!std::filesystem::exists(path))
  {
    throw InputError("input file '" + path.string() + "' does not exist");
  }
  RealMatrix m;
  if (options.format == MatrixFormat::Csv)
  {
    m = io::parse_csv_matrix(io::read_text(path), options.header);
  }
  else
  {
    const auto header = nlohmann::json::parse(io::read_text(raw_header_path(path)));
    const auto rows = header.at("rows").get<std::int64_t>();
    const auto cols = header.at("cols").get<std::int64_t>();
    if (rows <= 0 || cols <= 0)
    {
      throw InputError("raw header declares a non-positive dimension");
    }
    const auto payload = io::read_text(path);
    const auto expected = static_cast<std::size_t>(rows * cols) * sizeof(double);
    if (payload.size() != expected)
    {
      throw InputError("raw payload has " + std::to_string(payload.size()) +
                       " bytes, header implies " + std::to_string(expected));
    }
    m.resize(rows, cols);
    std::memcpy(m.data(), payload.data(), expected);
    if constexpr (std::endian::native == std::endian::big)
    {
      auto* words = reinterpret_cast<std::uint64_t*>(m.data());
      for (Eigen::Index i = 0; i < m.size(); ++i)
      {
        words[i] = __builtin_bswap64(words[i]);
      }
    }
  }
  if (options.transpose)
  {
    m.transposeInPlace();
  }
  require_columns(m.cols());
  if (options.grid && options.grid->size() < static_cast<std::size_t>(m.rows()))
  {
    throw InputError("grid " + std::to_string(options.grid->n_lat) + "x" +
                     std::to_string(options.grid->n_lon) + " is smaller than the " +
                     std::to_string(m.rows()) + " data rows");
  }

  SnapshotMatrix x;
  x.data = std::move(m);
  x.grid = options.grid;
  x.dt_label = options.dt_label;
  return x;
}

void write_raw_float64(const std::filesystem::path& path, const RealMatrix& m)
{
  std::string payload(static_cast<std::size_t>(m.size()) * sizeof(double), '\0');
  std::memcpy(payload.data(), m.data(), payload.size());
  if constexpr (std::endian::native == std::endian::big)
  {
    auto* words = reinterpret_cast<std::uint64_t*>(payload.data());
    for (Eigen::Index i = 0; i < m.size(); ++i)
    {
      words[i] = __builtin_bswap64(words[i]);
    }
  }
  io::write_text_atomic(path, payload);
  const nlohmann::json header = {{"rows", m.rows()}, {"cols", m.cols()}};
  io::write_text_atomic(raw_header_path(path), header.dump() + "\n");
}

void write_csv(const std::filesystem::path& path, const RealMatrix& m)
{
  io::write_text_atomic(path, io::matrix_to_csv(m));
}

std::vector<bool> load_mask(const std::filesystem::path& path)
{
  const auto values = io::parse_csv_matrix(io::read_text(path));
  std::vector<bool> mask;
  mask.reserve(static_cast<std::size_t>(values.size()));
  for (Eigen::Index i = 0; i < values.rows(); ++i)
  {
    for (Eigen::Index j = 0; j < values.cols(); ++j)
    {
      const double v = values(i, j);
      if (v != 0.0 && v != 1.0)
      {
        throw InputError("mask entries must be 0 or 1");
      }
      mask.push_back(v == 1.0);
    }
  }
  return mask;
}

SnapshotMatrix apply_mask(const SnapshotMatrix& x, const std::vector<bool>& mask)
{
  if (count_true(mask) == 0)
  {
    throw InputError("mask has no retained points");
  }
  const std::size_t expected = x.mask   ? x.mask->size()
                               : x.grid ? x.grid->size()
                                        : static_cast<std::size_t>(x.rows()) / x.cycle;
  if (mask.size() != expected)
  {
    throw InputError("mask length " + std::to_string(mask.size()) + " does not match grid size " +
                     std::to_string(expected));
  }

  // Rows currently present, as full-grid indices.
  std::vector<std::size_t> present;
  if (x.mask)
  {
    if (x.mask->size() != mask.size())
    {
      throw InputError("mask length differs from the stored mask");
    }
    for (std::size_t g = 0; g < x.mask->size(); ++g)
    {
      if ((*x.mask)[g])
      {
        present.push_back(g);
      }
      else if (mask[g])
      {
        throw InputError("mask retains point " + std::to_string(g) +
                         " that an earlier mask removed");
      }
    }
  }
  else
  {
    present.resize(mask.size());
    for (std::size_t g = 0; g < present.size(); ++g)
    {
      present[g] = g;
    }
  }
  if (present.size() * x.cycle != static_cast<std::size_t>(x.rows()))
  {
    throw InputError("matrix rows do not correspond to the grid");
  }

  std::vector<Eigen::Index> keep;
  for (std::size_t local = 0; local < present.size(); ++local)
  {
    if (mask[present[local]])
    {
      keep.push_back(static_cast<Eigen::Index>(local));
    }
  }

  const auto base = static_cast<Eigen::Index>(present.size());
  const auto kept = static_cast<Eigen::Index>(keep.size());
  SnapshotMatrix out = x;
  out.data.resize(kept * static_cast<Eigen::Index>(x.cycle), x.cols());
  for (std::size_t block = 0; block < x.cycle; ++block)
  {
    const auto b = static_cast<Eigen::Index>(block);
    for (Eigen::Index i = 0; i < kept; ++i)
    {
      out.data.row(b * kept + i) = x.data.row(b * base + keep[static_cast<std::size_t>(i)]);
    }
  }
  out.mask = mask;
  return out;
}

SnapshotMatrix stack_cycles(const SnapshotMatrix& x, std::size_t c)
{
  if (c == 0)
  {
    throw InputError("cycle length must be at least 1");
  }
  if (c > static_cast<std::size_t>(x.cols()))
  {
    throw InputError("cycle length " + std::to_string(c) + " exceeds the " +
                     std::to_string(x.cols()) + " available snapshots");
  }
  const auto ci = static_cast<Eigen::Index>(c);
  const auto p = x.rows();
  const auto n_out = x.cols() / ci;
  SnapshotMatrix out = x;
  out.data.resize(p * ci, n_out);
  for (Eigen::Index j = 0; j < n_out; ++j)
  {
    for (Eigen::Index k = 0; k < ci; ++k)
    {
      out.data.block(k * p, j, p, 1) = x.data.col(j * ci + k);
    }
  }
  out.cycle = x.cycle * c;
  const auto dropped = x.cols() - n_out * ci;
  if (dropped > 0)
  {
    out.warnings.push_back("stack_cycles: dropped " + std::to_string(dropped) +
                           " trailing column(s) not filling a whole cycle of " +
                           std::to_string(c));
  }
  return out;
}

SnapshotMatrix unstack_cycles(const SnapshotMatrix& x)
{
  const auto c = static_cast<Eigen::Index>(x.cycle);
  if (c < 1 || x.rows() % c != 0)
  {
    throw InputError("row count is not a multiple of the stacking cycle");
  }
  const auto p = x.rows() / c;
  SnapshotMatrix out = x;
  out.data.resize(p, x.cols() * c);
  for (Eigen::Index j = 0; j < x.cols(); ++j)
  {
    for (Eigen::Index k = 0; k < c; ++k)
    {
      out.data.col(j * c + k) = x.data.block(k * p, j, p, 1);
    }
  }
  out.cycle = 1;
  return out;
}

SnapshotPair build_pairs(const SnapshotMatrix& x)
{
  require_columns(x.cols());
  const auto m = x.cols() - 1;
  return {x.data.leftCols(m), x.data.rightCols(m), x.dt_label};
}

CenteredSnapshots subtract_mean(const SnapshotMatrix& x)
{
  CenteredSnapshots out{x, x.data.rowwise().mean()};
  out.centered.data.colwise() -= out.mean;
  return out;
}

} // namespace kmd
