#include <algorithm>
#include <cmath>
#include <limits>

#include "kmd/cli.hpp"
#include "kmd/io.hpp"

namespace kmd::cli
{

std::string render_ppm(const RealMatrix& grid)
{
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (Eigen::Index i = 0; i < grid.size(); ++i)
  {
    const double v = grid.data()[i];
    if (std::isfinite(v))
    {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  const double span = hi - lo;

  std::string out = "P6\n" + std::to_string(grid.cols()) + " " + std::to_string(grid.rows()) + "\n255\n";
  out.reserve(out.size() + static_cast<std::size_t>(grid.size()) * 3);
  for (Eigen::Index i = 0; i < grid.rows(); ++i)
  {
    for (Eigen::Index j = 0; j < grid.cols(); ++j)
    {
      const double v = grid(i, j);
      if (std::isnan(v))
      {
        out += static_cast<char>(kNanColor.r);
        out += static_cast<char>(kNanColor.g);
        out += static_cast<char>(kNanColor.b);
        continue;
      }
      double level = 0.0;
      if (span > 0.0 && std::isfinite(span))
      {
        level = std::clamp((v - lo) / span, 0.0, 1.0);
      }
      else if (std::isinf(v))
      {
        level = v > 0 ? 1.0 : 0.0;
      }
      const auto gray = static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * level)));
      out.append(3, gray);
    }
  }
  return out;
}

void cmd_heatmap(const std::filesystem::path& grid_csv, const std::filesystem::path& out)
{
  const auto grid = io::parse_csv_matrix(io::read_text(grid_csv));
  if (grid.size() == 0)
  {
    throw InputError("heatmap: grid is empty");
  }
  io::write_text_atomic(out, render_ppm(grid));
}

} // namespace kmd::cli
