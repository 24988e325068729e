#include "kmd/rom.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>

namespace kmd
{

namespace
{

constexpr double kPairTolerance = 1e-8;

} // namespace

ReducedOrderModel make_model(const DecompositionResult& result)
{
  if (!result.has_amplitudes())
  {
    throw InputError("make_model: decomposition has no fitted amplitudes");
  }
  const auto sorted = take_columns(result, amplitude_order(result));
  ReducedOrderModel model;
  model.spatial_dim = sorted.modes.rows();
  model.dt_label = sorted.dt_label;
  for (Eigen::Index j = 0; j < sorted.rank; ++j)
  {
    KoopmanTuple t;
    t.eigenvalue = sorted.eigenvalues(j);
    t.mode = sorted.modes.col(j);
    t.amplitude = sorted.amplitudes(j);
    t.original_index = sorted.original_index[static_cast<std::size_t>(j)];
    if (t.eigenvalue != Complex{0.0, 0.0})
    {
      const auto stats = mode_stats(t.eigenvalue);
      t.magnitude = stats.magnitude;
      t.e_folding = stats.e_folding;
      t.period = stats.period;
    }
    else
    {
      // A zero eigenvalue decays in one step and has no oscillation.
      t.e_folding = 0.0;
      t.period = std::numeric_limits<double>::infinity();
    }
    model.tuples.push_back(std::move(t));
  }
  if (model.tuples.empty())
  {
    throw InputError("make_model: decomposition has no modes");
  }
  return model;
}

Complex integer_power(Complex lambda, std::size_t k)
{
  Complex result{1.0, 0.0};
  Complex base = lambda;
  while (k > 0)
  {
    if (k & 1u)
    {
      result *= base;
    }
    k >>= 1u;
    if (k > 0)
    {
      base *= base;
    }
  }
  return result;
}

Reconstruction reconstruct(const ReducedOrderModel& model, std::size_t k)
{
  ComplexVector sum = ComplexVector::Zero(model.spatial_dim);
  for (const auto& t : model.tuples)
  {
    sum += t.mode * (integer_power(t.eigenvalue, k) * t.amplitude);
  }
  Reconstruction out;
  out.values = sum.real();
  const double re = out.values.norm();
  const double im = sum.imag().norm();
  out.imaginary_residual = re > 0.0 ? im / re : im;
  return out;
}

TemporalDynamics temporal_dynamics(const ReducedOrderModel& model, std::size_t t_begin,
                                   std::size_t t_end, bool collapse_pairs)
{
  if (t_end <= t_begin)
  {
    throw InputError("temporal_dynamics: empty time range");
  }
  const auto m = model.size();
  // partner[j] = index of the conjugate partner, or m when unpaired.
  std::vector<std::size_t> partner(m, m);
  if (collapse_pairs)
  {
    for (std::size_t j = 0; j < m; ++j)
    {
      const auto lj = model.tuples[j].eigenvalue;
      if (partner[j] != m || lj.imag() == 0.0)
      {
        continue;
      }
      const double tol = kPairTolerance * std::max(1.0, std::abs(lj));
      for (std::size_t i = j + 1; i < m; ++i)
      {
        if (partner[i] == m && std::abs(model.tuples[i].eigenvalue - std::conj(lj)) <= tol)
        {
          partner[j] = i;
          partner[i] = j;
          break;
        }
      }
    }
  }

  TemporalDynamics out;
  for (std::size_t t = t_begin; t < t_end; ++t)
  {
    out.times.push_back(t);
  }
  for (std::size_t j = 0; j < m; ++j)
  {
    if (partner[j] != m && model.tuples[j].eigenvalue.imag() < 0.0)
    {
      continue;
    }
    out.tuple_index.push_back(j);
  }
  out.values.resize(static_cast<Eigen::Index>(out.tuple_index.size()),
                    static_cast<Eigen::Index>(out.times.size()));
  for (std::size_t row = 0; row < out.tuple_index.size(); ++row)
  {
    const auto j = out.tuple_index[row];
    for (std::size_t c = 0; c < out.times.size(); ++c)
    {
      const auto& tj = model.tuples[j];
      double v = (integer_power(tj.eigenvalue, out.times[c]) * tj.amplitude).real();
      if (partner[j] != m)
      {
        const auto& tp = model.tuples[partner[j]];
        v += (integer_power(tp.eigenvalue, out.times[c]) * tp.amplitude).real();
      }
      out.values(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(c)) = v;
    }
  }
  return out;
}

namespace
{

/// Entry i of the reconstruction at step k when the direct sum overflows:
/// the sign of the dominant term, saturated at DBL_MAX.
double saturated_entry(const ReducedOrderModel& model, Eigen::Index i, std::size_t k)
{
  double best_log = -std::numeric_limits<double>::infinity();
  double best_cos = 0.0;
  for (const auto& t : model.tuples)
  {
    const Complex v = t.mode(i);
    if (v == Complex{0.0, 0.0} || t.amplitude == Complex{0.0, 0.0} || t.eigenvalue == Complex{0.0, 0.0})
    {
      continue;
    }
    const double kd = static_cast<double>(k);
    const double log_mag = std::log(std::abs(v)) + std::log(std::abs(t.amplitude)) + kd * std::log(std::abs(t.eigenvalue));
    const double phase = std::arg(v) + std::arg(t.amplitude) + kd * std::arg(t.eigenvalue);
    if (log_mag > best_log)
    {
      best_log = log_mag;
      best_cos = std::cos(phase);
    }
  }
  if (best_cos == 0.0)
  {
    return 0.0;
  }
  return best_cos > 0.0 ? DBL_MAX : -DBL_MAX;
}

} // namespace

Forecast forecast(const ReducedOrderModel& model, std::size_t horizon, std::size_t n_train)
{
  if (horizon < 1)
  {
    throw InputError("forecast: horizon must be at least 1");
  }
  Forecast out;
  out.values.resize(model.spatial_dim, static_cast<Eigen::Index>(horizon));
  std::size_t saturated = 0;
  for (std::size_t h = 0; h < horizon; ++h)
  {
    const auto k = n_train + h;
    auto col = reconstruct(model, k).values;
    for (Eigen::Index i = 0; i < col.size(); ++i)
    {
      if (!std::isfinite(col(i)))
      {
        col(i) = saturated_entry(model, i, k);
        ++saturated;
      }
    }
    out.values.col(static_cast<Eigen::Index>(h)) = col;
  }
  if (saturated > 0)
  {
    out.warnings.push_back("forecast: " + std::to_string(saturated) +
                           " value(s) overflowed; infinities saturated at +-DBL_MAX");
  }
  return out;
}

GridLayout GridLayout::from(const SnapshotMatrix& x)
{
  if (!x.grid)
  {
    throw InputError("grid metadata is missing");
  }
  return {*x.grid, x.mask, x.cycle};
}

std::size_t GridLayout::base_points() const
{
  return mask ? static_cast<std::size_t>(std::count(mask->begin(), mask->end(), true)) : grid.size();
}

std::vector<RealMatrix> mode_grids(const ComplexVector& mode, const GridLayout& layout,
                                   ModeComponent component, bool mean_over_cycle)
{
  if (layout.mask && layout.mask->size() != layout.grid.size())
  {
    throw InputError("mode_grids: mask length differs from the grid size");
  }
  const auto base = layout.base_points();
  if (layout.cycle == 0 || base * layout.cycle != static_cast<std::size_t>(mode.size()))
  {
    throw InputError("mode_grids: mode length " + std::to_string(mode.size()) +
                     " is inconsistent with the grid (" + std::to_string(base) + " points x cycle " +
                     std::to_string(layout.cycle) + ")");
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const auto n_lat = static_cast<Eigen::Index>(layout.grid.n_lat);
  const auto n_lon = static_cast<Eigen::Index>(layout.grid.n_lon);
  auto value = [&](Eigen::Index i) {
    switch (component)
    {
      case ModeComponent::Real:
        return mode(i).real();
      case ModeComponent::Imag:
        return mode(i).imag();
      case ModeComponent::Abs:
        break;
    }
    return std::abs(mode(i));
  };

  std::vector<RealMatrix> grids;
  for (std::size_t slot = 0; slot < layout.cycle; ++slot)
  {
    RealMatrix g = RealMatrix::Constant(n_lat, n_lon, nan);
    auto row = static_cast<Eigen::Index>(slot * base);
    for (std::size_t cell = 0; cell < layout.grid.size(); ++cell)
    {
      if (layout.mask && !(*layout.mask)[cell])
      {
        continue;
      }
      g(static_cast<Eigen::Index>(cell / layout.grid.n_lon),
        static_cast<Eigen::Index>(cell % layout.grid.n_lon)) = value(row++);
    }
    grids.push_back(std::move(g));
  }
  if (mean_over_cycle && grids.size() > 1)
  {
    RealMatrix mean = grids.front();
    for (std::size_t slot = 1; slot < grids.size(); ++slot)
    {
      mean += grids[slot];
    }
    mean /= static_cast<double>(grids.size());
    return {mean};
  }
  return grids;
}

} // namespace kmd
