#include "kmd/cli.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "kmd/cdmd.hpp"
#include "kmd/io.hpp"
#include "kmd/rom.hpp"

namespace kmd::cli
{

namespace
{

std::string method_name(DecompositionMethod m)
{
  switch (m)
  {
    case DecompositionMethod::Dmd:
      return "dmd";
    case DecompositionMethod::Cdmd:
      return "cdmd";
    case DecompositionMethod::Spdmd:
      return "spdmd";
  }
  return "unknown";
}

std::string csv_row(const std::vector<std::string>& fields)
{
  std::string line;
  for (std::size_t i = 0; i < fields.size(); ++i)
  {
    if (i > 0)
    {
      line += ',';
    }
    line += fields[i];
  }
  line += '\n';
  return line;
}

std::string fmt(double v) { return io::format_double(v); }

nlohmann::json finite_or_string(double v)
{
  if (std::isfinite(v))
  {
    return v;
  }
  return io::format_double(v);
}

std::string json_text(const nlohmann::json& j) { return j.dump(2) + "\n"; }

RealMatrix fitted_snapshots(const SnapshotMatrix& x) { return x.data.leftCols(x.cols() - 1); }

std::string eigenvalues_csv(const DecompositionResult& result)
{
  std::string out = csv_row({"index", "re", "im", "magnitude", "e_folding", "period", "amp_re", "amp_im", "amp_abs"});
  for (Eigen::Index j = 0; j < result.rank; ++j)
  {
    const Complex lambda = result.eigenvalues(j);
    ModeStats stats{0.0, 0.0, std::numeric_limits<double>::infinity()};
    if (lambda != Complex{0.0, 0.0})
    {
      stats = mode_stats(lambda);
    }
    const Complex b = result.amplitudes(j);
    out += csv_row({std::to_string(result.original_index[static_cast<std::size_t>(j)]), fmt(lambda.real()),
                    fmt(lambda.imag()), fmt(stats.magnitude), fmt(stats.e_folding), fmt(std::abs(stats.period)),
                    fmt(b.real()), fmt(b.imag()), fmt(std::abs(b))});
  }
  return out;
}

std::optional<GridLayout> layout_of(const SnapshotMatrix& x)
{
  if (!x.grid)
  {
    return std::nullopt;
  }
  return GridLayout::from(x);
}

void add_mode_grids(ArtifactSet& artifacts, const DecompositionResult& result, const SnapshotMatrix& x,
                    bool mean_over_cycle)
{
  const auto layout = layout_of(x);
  const std::pair<ModeComponent, const char*> components[] = {
    {ModeComponent::Real, "real"}, {ModeComponent::Imag, "imag"}, {ModeComponent::Abs, "abs"}};
  for (Eigen::Index j = 0; j < result.rank; ++j)
  {
    const auto index = std::to_string(result.original_index[static_cast<std::size_t>(j)]);
    const ComplexVector mode = result.modes.col(j);
    for (const auto& [component, name] : components)
    {
      std::vector<RealMatrix> grids;
      if (layout)
      {
        grids = mode_grids(mode, *layout, component, mean_over_cycle);
      }
      else
      {
        RealMatrix column(mode.size(), 1);
        for (Eigen::Index i = 0; i < mode.size(); ++i)
        {
          column(i, 0) = component == ModeComponent::Real   ? mode(i).real()
                         : component == ModeComponent::Imag ? mode(i).imag()
                                                            : std::abs(mode(i));
        }
        grids.push_back(std::move(column));
      }
      if (grids.size() == 1)
      {
        artifacts.add(std::filesystem::path("modes") / (index + "_" + name + ".csv"), io::matrix_to_csv(grids[0]));
        continue;
      }
      for (std::size_t slot = 0; slot < grids.size(); ++slot)
      {
        artifacts.add(std::filesystem::path("modes") / (index + "_" + name + "_s" + std::to_string(slot) + ".csv"),
                      io::matrix_to_csv(grids[slot]));
      }
    }
  }
}

std::string temporal_csv(const DecompositionResult& result, std::size_t steps, bool collapse)
{
  const auto model = make_model(result);
  const auto dyn = temporal_dynamics(model, 0, steps, collapse);
  std::vector<std::string> header{"t"};
  for (const auto j : dyn.tuple_index)
  {
    header.push_back("mode_" + std::to_string(model.tuples[j].original_index));
  }
  std::string out = csv_row(header);
  for (std::size_t c = 0; c < dyn.times.size(); ++c)
  {
    std::vector<std::string> row{std::to_string(dyn.times[c])};
    for (Eigen::Index r = 0; r < dyn.values.rows(); ++r)
    {
      row.push_back(fmt(dyn.values(r, static_cast<Eigen::Index>(c))));
    }
    out += csv_row(row);
  }
  return out;
}

nlohmann::json data_json(const PreparedData& data)
{
  const auto& x = data.snapshots;
  nlohmann::json j = {{"input_rows", data.input_rows},
                      {"input_cols", data.input_cols},
                      {"rows", x.rows()},
                      {"cols", x.cols()},
                      {"cycle", x.cycle},
                      {"base_points", x.base_points()},
                      {"centered", data.mean.size() > 0},
                      {"dt_label", x.dt_label}};
  if (x.grid)
  {
    j["grid"] = {{"n_lat", x.grid->n_lat}, {"n_lon", x.grid->n_lon}};
  }
  return j;
}

std::string sweep_csv(const std::vector<SparseSolution>& solutions, const std::vector<std::size_t>& rows)
{
  std::string out = csv_row({"gamma", "cardinality", "cost", "loss_percent", "iterations", "converged"});
  for (const auto i : rows)
  {
    const auto& s = solutions[i];
    out += csv_row({fmt(s.gamma), std::to_string(s.cardinality), fmt(s.cost), fmt(s.loss_percent),
                    std::to_string(s.iterations), s.converged ? "1" : "0"});
  }
  return out;
}

DecompositionResult load_model(const std::filesystem::path& dir)
{
  for (const auto* name : {"eigenvalues.csv", "model_modes_real.csv", "model_modes_imag.csv"})
  {
    if (!std::filesystem::exists(dir / name))
    {
      throw InputError("reconstruct: missing model artifact '" + (dir / name).string() + "'");
    }
  }
  const auto text = io::read_text(dir / "eigenvalues.csv");
  const auto header_end = text.find('\n');
  const auto header = io::split_csv_line(std::string_view(text).substr(0, header_end));
  auto column = [&](std::string_view name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
    {
      throw InputError("reconstruct: eigenvalues.csv lacks column '" + std::string(name) + "'");
    }
    return static_cast<Eigen::Index>(it - header.begin());
  };
  const auto table = io::parse_csv_matrix(text, true);
  const auto c_index = column("index");
  const auto c_re = column("re");
  const auto c_im = column("im");
  const auto c_are = column("amp_re");
  const auto c_aim = column("amp_im");

  const auto modes_re = io::parse_csv_matrix(io::read_text(dir / "model_modes_real.csv"));
  const auto modes_im = io::parse_csv_matrix(io::read_text(dir / "model_modes_imag.csv"));
  const auto r = table.rows();
  if (modes_re.cols() != r || modes_im.cols() != r || modes_re.rows() != modes_im.rows())
  {
    throw InputError("reconstruct: model mode files disagree with eigenvalues.csv");
  }
  DecompositionResult result;
  result.rank = r;
  result.eigenvalues.resize(r);
  result.amplitudes.resize(r);
  result.modes.resize(modes_re.rows(), r);
  for (Eigen::Index j = 0; j < r; ++j)
  {
    result.eigenvalues(j) = {table(j, c_re), table(j, c_im)};
    result.amplitudes(j) = {table(j, c_are), table(j, c_aim)};
    result.original_index.push_back(static_cast<std::size_t>(table(j, c_index)));
  }
  result.modes.real() = modes_re;
  result.modes.imag() = modes_im;
  return result;
}

} // namespace

void RunConfig::validate(Command command) const
{
  if (command != Command::IngestInfo && output_dir.empty())
  {
    throw UsageError("an output directory (--out) is required");
  }
  if (input.empty())
  {
    throw UsageError("an input file (--input) is required");
  }
  if (cycle < 1)
  {
    throw UsageError("--cycle must be at least 1");
  }
  if (rank && *rank < 1)
  {
    throw UsageError("--rank must be at least 1");
  }
  if (gamma_count < 1)
  {
    throw UsageError("--gamma-count must be at least 1");
  }
  if (gamma_min > gamma_max)
  {
    throw UsageError("--gamma-min exceeds --gamma-max");
  }
  if (gamma_count > 1 && gamma_min <= 0.0)
  {
    throw UsageError("a log-spaced gamma grid needs --gamma-min > 0");
  }
  if (gamma_min < 0.0)
  {
    throw UsageError("gamma must be non-negative");
  }
  if (solver.rho <= 0.0 || solver.eps_abs <= 0.0 || solver.eps_rel < 0.0 || solver.max_iter < 1)
  {
    throw UsageError("solver parameters must be positive");
  }
  if (command == Command::Sweep && method != DecompositionMethod::Spdmd)
  {
    throw UsageError("sweep requires --method spdmd");
  }
  if (command == Command::Decompose && method == DecompositionMethod::Spdmd && gamma_count != 1)
  {
    throw UsageError("decompose with --method spdmd takes a single --gamma");
  }
  if (command == Command::Reconstruct)
  {
    if (horizon < 1)
    {
      throw UsageError("--horizon must be at least 1");
    }
    if (model_dir.empty())
    {
      throw UsageError("reconstruct requires --model-dir");
    }
  }
}

nlohmann::json RunConfig::to_json() const
{
  nlohmann::json j = {
    {"input", input.string()},
    {"format", format == MatrixFormat::Csv ? "csv" : "raw"},
    {"mask", mask ? nlohmann::json(mask->string()) : nlohmann::json(nullptr)},
    {"cycle", cycle},
    {"method", method_name(method)},
    {"rank", rank ? nlohmann::json(*rank) : nlohmann::json(nullptr)},
    {"mode_style", mode_style == ModeStyle::Exact ? "exact" : "projected"},
    {"gamma_min", gamma_min},
    {"gamma_max", gamma_max},
    {"gamma_count", gamma_count},
    {"rho", solver.rho},
    {"eps_abs", solver.eps_abs},
    {"eps_rel", solver.eps_rel},
    {"max_iter", solver.max_iter},
    {"warm_start", warm_start},
    {"subtract_mean", subtract_mean},
    {"transpose", transpose},
    {"header", header},
    {"pair_collapse", pair_collapse},
    {"mean_over_cycle", mean_over_cycle},
    {"dt_label", dt_label},
  };
  j["grid"] = grid ? nlohmann::json{{"n_lat", grid->n_lat}, {"n_lon", grid->n_lon}} : nlohmann::json(nullptr);
  return j;
}

PreparedData prepare_data(const RunConfig& config)
{
  LoadOptions options;
  options.format = config.format;
  options.grid = config.grid;
  options.header = config.header;
  options.transpose = config.transpose;
  options.dt_label = config.dt_label;
  PreparedData out;
  auto x = load_matrix(config.input, options);
  out.input_rows = static_cast<std::size_t>(x.rows());
  out.input_cols = static_cast<std::size_t>(x.cols());
  if (config.mask)
  {
    const auto mask = load_mask(*config.mask);
    const auto kept = static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true));
    if (static_cast<std::size_t>(x.rows()) == mask.size())
    {
      x = apply_mask(x, mask);
    }
    else if (static_cast<std::size_t>(x.rows()) == kept)
    {
      // Rows were already restricted to the retained points.
      if (x.grid && x.grid->size() != mask.size())
      {
        throw InputError("mask length does not match the grid size");
      }
      x.mask = mask;
    }
    else
    {
      throw InputError("data has " + std::to_string(x.rows()) + " rows; mask covers " +
                       std::to_string(mask.size()) + " points with " + std::to_string(kept) + " retained");
    }
  }
  x.validate();
  if (config.cycle > 1)
  {
    x = stack_cycles(x, config.cycle);
  }
  if (config.subtract_mean)
  {
    auto centered = subtract_mean(x);
    x = std::move(centered.centered);
    out.mean = std::move(centered.mean);
  }
  x.validate();
  out.snapshots = std::move(x);
  return out;
}

DecompositionResult run_decomposition(const RunConfig& config, const SnapshotMatrix& x)
{
  if (config.method == DecompositionMethod::Cdmd)
  {
    return companion_dmd(x);
  }
  const auto pair = build_pairs(x);
  auto result = fit_amplitudes(exact_dmd(pair, config.rank, config.mode_style), pair.Y);
  if (config.method == DecompositionMethod::Dmd)
  {
    return result;
  }
  const auto form = quadratic_form(pair.Y, result.modes, vandermonde(result.eigenvalues, pair.Y.cols()));
  const AdmmSolver solver(form, config.solver);
  auto solution = sparse_amplitudes(solver, config.gamma_min);
  auto selected = select_modes(result, solution);
  selected.warnings.insert(selected.warnings.end(), solution.warnings.begin(), solution.warnings.end());
  return selected;
}

void ArtifactSet::add(const std::filesystem::path& relative, std::string contents)
{
  files_[relative] = std::move(contents);
}

void ArtifactSet::commit(const std::filesystem::path& output_dir) const
{
  std::vector<std::filesystem::path> written;
  try
  {
    std::filesystem::create_directories(output_dir);
    for (const auto& [relative, contents] : files_)
    {
      const auto target = output_dir / relative;
      std::filesystem::create_directories(target.parent_path());
      io::write_text_atomic(target, contents);
      written.push_back(target);
    }
  }
  catch (...)
  {
    std::error_code ec;
    for (const auto& path : written)
    {
      std::filesystem::remove(path, ec);
    }
    throw;
  }
}

ArtifactSet decompose_artifacts(const RunConfig& config)
{
  config.validate(Command::Decompose);
  const auto data = prepare_data(config);
  const auto& x = data.snapshots;
  const auto result = run_decomposition(config, x);
  const RealMatrix y = fitted_snapshots(x);

  ArtifactSet artifacts;
  artifacts.add("eigenvalues.csv", eigenvalues_csv(result));
  add_mode_grids(artifacts, result, x, config.mean_over_cycle);
  artifacts.add("model_modes_real.csv", io::matrix_to_csv(result.modes.real()));
  artifacts.add("model_modes_imag.csv", io::matrix_to_csv(result.modes.imag()));
  if (data.mean.size() > 0)
  {
    artifacts.add("mean.csv", io::matrix_to_csv(data.mean));
  }
  if (result.rank > 0)
  {
    artifacts.add("temporal.csv", temporal_csv(result, static_cast<std::size_t>(x.cols()), config.pair_collapse));
  }

  auto warnings = x.warnings;
  warnings.insert(warnings.end(), result.warnings.begin(), result.warnings.end());
  const nlohmann::json summary = {
    {"toolkit", "kmd"},
    {"version", kToolkitVersion},
    {"command", "decompose"},
    {"method", to_string(result.method)},
    {"rank", result.rank},
    {"loss_percent", finite_or_string(reconstruction_loss_percent(y, result))},
    {"eigenvector_condition", finite_or_string(result.eigenvector_condition)},
    {"data", data_json(data)},
    {"warnings", warnings},
    {"config", config.to_json()},
  };
  artifacts.add("summary.json", json_text(summary));
  return artifacts;
}

ArtifactSet sweep_artifacts(const RunConfig& config)
{
  config.validate(Command::Sweep);
  const auto data = prepare_data(config);
  const auto& x = data.snapshots;
  const auto pair = build_pairs(x);
  const auto result = fit_amplitudes(exact_dmd(pair, config.rank, config.mode_style), pair.Y);
  const auto form = quadratic_form(pair.Y, result.modes, vandermonde(result.eigenvalues, pair.Y.cols()));
  const auto gammas = log_gamma_grid(config.gamma_min, config.gamma_max, config.gamma_count);
  const auto sweep = gamma_sweep(form, gammas, config.solver, {config.warm_start, 0});

  std::vector<std::size_t> all(sweep.solutions.size());
  for (std::size_t i = 0; i < all.size(); ++i)
  {
    all[i] = i;
  }
  ArtifactSet artifacts;
  artifacts.add("sweep.csv", sweep_csv(sweep.solutions, all));
  artifacts.add("pareto.csv", sweep_csv(sweep.solutions, pareto_rows(sweep.points)));

  auto warnings = x.warnings;
  warnings.insert(warnings.end(), result.warnings.begin(), result.warnings.end());
  std::size_t unconverged = 0;
  for (const auto& s : sweep.solutions)
  {
    unconverged += s.converged ? 0 : 1;
  }
  const nlohmann::json summary = {
    {"toolkit", "kmd"},
    {"version", kToolkitVersion},
    {"command", "sweep"},
    {"method", "spdmd"},
    {"rank", result.rank},
    {"loss_percent", finite_or_string(reconstruction_loss_percent(pair.Y, result))},
    {"points", sweep.points.size()},
    {"unconverged_points", unconverged},
    {"data", data_json(data)},
    {"warnings", warnings},
    {"config", config.to_json()},
  };
  artifacts.add("summary.json", json_text(summary));
  return artifacts;
}

ArtifactSet reconstruct_artifacts(const RunConfig& config)
{
  config.validate(Command::Reconstruct);
  const auto data = prepare_data(config);
  const auto& x = data.snapshots;
  const auto model = make_model(load_model(config.model_dir));
  if (model.spatial_dim != x.rows())
  {
    throw InputError("reconstruct: model has " + std::to_string(model.spatial_dim) + " rows, data has " +
                     std::to_string(x.rows()));
  }
  const bool centered = data.mean.size() > 0;
  auto restore = [&](RealVector v) {
    if (centered)
    {
      v += data.mean;
    }
    return v;
  };

  nlohmann::json errors = nlohmann::json::array();
  double max_err = 0.0;
  double sum_err = 0.0;
  double max_imag = 0.0;
  for (Eigen::Index k = 0; k < x.cols(); ++k)
  {
    const auto rec = reconstruct(model, static_cast<std::size_t>(k));
    const RealVector truth = restore(x.data.col(k));
    const RealVector approx = restore(rec.values);
    const double denom = truth.norm();
    const double err = denom > 0.0 ? (truth - approx).norm() / denom : (truth - approx).norm();
    errors.push_back(finite_or_string(err));
    max_err = std::max(max_err, err);
    sum_err += err;
    max_imag = std::max(max_imag, rec.imaginary_residual);
  }

  ArtifactSet artifacts;
  for (const auto k : config.indices)
  {
    artifacts.add("recon_" + std::to_string(k) + ".csv", io::matrix_to_csv(restore(reconstruct(model, k).values)));
  }
  auto fc = forecast(model, config.horizon, static_cast<std::size_t>(x.cols()));
  if (centered)
  {
    fc.values.colwise() += data.mean;
  }
  artifacts.add("forecast.csv", io::matrix_to_csv(fc.values));

  const nlohmann::json report = {
    {"toolkit", "kmd"},
    {"version", kToolkitVersion},
    {"command", "reconstruct"},
    {"modes", model.size()},
    {"columns", x.cols()},
    {"forecast_start", x.cols()},
    {"horizon", config.horizon},
    {"relative_errors", errors},
    {"max_relative_error", finite_or_string(max_err)},
    {"mean_relative_error", finite_or_string(sum_err / static_cast<double>(x.cols()))},
    {"max_imaginary_residual", finite_or_string(max_imag)},
    {"warnings", fc.warnings},
  };
  artifacts.add("recon_report.json", json_text(report));
  return artifacts;
}

void cmd_ingest_info(const RunConfig& config, std::ostream& out)
{
  config.validate(Command::IngestInfo);
  LoadOptions options;
  options.format = config.format;
  options.grid = config.grid;
  options.header = config.header;
  options.transpose = config.transpose;
  options.dt_label = config.dt_label;
  const auto raw = load_matrix(config.input, options);
  const auto non_finite = static_cast<std::size_t>((!raw.data.array().isFinite()).count());
  nlohmann::json info = {{"rows", raw.rows()}, {"cols", raw.cols()}, {"non_finite", non_finite}};
  try
  {
    info["prepared"] = data_json(prepare_data(config));
    info["valid"] = true;
  }
  catch (const InputError& e)
  {
    info["valid"] = false;
    info["error"] = e.what();
  }
  out << info.dump(2) << "\n";
}

void cmd_decompose(const RunConfig& config) { decompose_artifacts(config).commit(config.output_dir); }

void cmd_sweep(const RunConfig& config) { sweep_artifacts(config).commit(config.output_dir); }

void cmd_reconstruct(const RunConfig& config) { reconstruct_artifacts(config).commit(config.output_dir); }

namespace
{

GridShape parse_grid(const std::string& text)
{
  const auto x = text.find_first_of("xX");
  if (x == std::string::npos)
  {
    throw UsageError("--grid expects NLATxNLON, got '" + text + "'");
  }
  try
  {
    const auto n_lat = std::stoul(text.substr(0, x));
    const auto n_lon = std::stoul(text.substr(x + 1));
    if (n_lat == 0 || n_lon == 0)
    {
      throw UsageError("--grid dimensions must be positive");
    }
    return {n_lat, n_lon};
  }
  catch (const std::logic_error&)
  {
    throw UsageError("--grid expects NLATxNLON, got '" + text + "'");
  }
}

struct CliState
{
  RunConfig config;
  std::string format = "csv";
  std::string grid;
  std::string mask;
  std::string method = "dmd";
  long rank = 0;
  std::string mode_style = "exact";
  std::optional<double> gamma;
  bool no_warm_start = false;
};

void add_data_options(CLI::App* sub, CliState& s)
{
  sub->add_option("-i,--input", s.config.input, "Snapshot matrix (rows = space, columns = time)")->required();
  sub->add_option("--format", s.format, "Input format")->check(CLI::IsMember({"csv", "raw"}));
  sub->add_option("--grid", s.grid, "Grid shape NLATxNLON, e.g. 10x60");
  sub->add_option("--mask", s.mask, "0/1 mask CSV over the full grid (row-major)");
  sub->add_option("--cycle", s.config.cycle, "Stack this many consecutive snapshots per column");
  sub->add_option("--dt-label", s.config.dt_label, "Unit of one input column");
  sub->add_flag("--header", s.config.header, "Skip the first CSV line");
  sub->add_flag("--transpose", s.config.transpose, "Input has rows = time");
  sub->add_flag("--subtract-mean", s.config.subtract_mean, "Remove each row's temporal mean");
}

void add_model_options(CLI::App* sub, CliState& s)
{
  sub->add_option("-o,--out", s.config.output_dir, "Output directory")->required();
  sub->add_option("--method", s.method, "Decomposition method")->check(CLI::IsMember({"dmd", "cdmd", "spdmd"}));
  sub->add_option("--rank", s.rank, "SVD truncation rank (default: numerical rank)");
  sub->add_option("--mode-style", s.mode_style, "DMD mode formula")->check(CLI::IsMember({"exact", "projected"}));
  sub->add_option("--gamma", s.gamma, "Single sparsity weight");
  sub->add_option("--gamma-min", s.config.gamma_min, "Smallest sparsity weight");
  sub->add_option("--gamma-max", s.config.gamma_max, "Largest sparsity weight");
  sub->add_option("--gamma-count", s.config.gamma_count, "Number of log-spaced weights");
  sub->add_option("--rho", s.config.solver.rho, "ADMM penalty parameter");
  sub->add_option("--eps-abs", s.config.solver.eps_abs, "ADMM absolute tolerance");
  sub->add_option("--eps-rel", s.config.solver.eps_rel, "ADMM relative tolerance");
  sub->add_option("--max-iter", s.config.solver.max_iter, "ADMM iteration limit");
  sub->add_flag("--no-warm-start", s.no_warm_start, "Solve every weight from scratch");
  sub->add_flag("--pair-collapse", s.config.pair_collapse, "Show conjugate pairs once in temporal.csv");
  sub->add_flag("--mean-over-cycle", s.config.mean_over_cycle, "Average mode grids over cycle slots");
}

void finalize(CliState& s)
{
  auto& c = s.config;
  c.format = s.format == "raw" ? MatrixFormat::RawFloat64 : MatrixFormat::Csv;
  if (!s.grid.empty())
  {
    c.grid = parse_grid(s.grid);
  }
  if (!s.mask.empty())
  {
    c.mask = s.mask;
  }
  c.method = s.method == "cdmd"    ? DecompositionMethod::Cdmd
             : s.method == "spdmd" ? DecompositionMethod::Spdmd
                                   : DecompositionMethod::Dmd;
  if (s.rank < 0)
  {
    throw UsageError("--rank must be positive");
  }
  if (s.rank > 0)
  {
    c.rank = s.rank;
  }
  c.mode_style = s.mode_style == "projected" ? ModeStyle::Projected : ModeStyle::Exact;
  if (s.gamma)
  {
    c.gamma_min = c.gamma_max = *s.gamma;
    c.gamma_count = 1;
  }
  c.warm_start = !s.no_warm_start;
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
  CLI::App app{"Koopman mode decomposition of gridded snapshot data"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolkitVersion);

  CliState state;
  std::string heat_in;
  std::string heat_out;

  auto* info = app.add_subcommand("ingest-info", "Report the shape of an input matrix");
  add_data_options(info, state);

  auto* decompose = app.add_subcommand("decompose", "Eigenvalues, modes and amplitudes");
  add_data_options(decompose, state);
  add_model_options(decompose, state);

  auto* sweep = app.add_subcommand("sweep", "Sparsity-weight sweep (spdmd)");
  add_data_options(sweep, state);
  add_model_options(sweep, state);

  auto* recon = app.add_subcommand("reconstruct", "Reconstruct and forecast from decompose artifacts");
  add_data_options(recon, state);
  recon->add_option("-o,--out", state.config.output_dir, "Output directory")->required();
  recon->add_option("--model-dir", state.config.model_dir, "Directory written by decompose")->required();
  recon->add_option("--horizon", state.config.horizon, "Forecast steps past the data")->required();
  recon->add_option("--index", state.config.indices, "Snapshot indices to write as recon_<k>.csv");

  auto* heat = app.add_subcommand("heatmap", "Render a grid CSV as a PPM image");
  heat->add_option("grid", heat_in, "Grid CSV")->required();
  heat->add_option("image", heat_out, "Output .ppm path")->required();

  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::ParseError& e)
  {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try
  {
    if (*heat)
    {
      cmd_heatmap(heat_in, heat_out);
      return 0;
    }
    finalize(state);
    if (*info)
    {
      cmd_ingest_info(state.config, out);
    }
    else if (*decompose)
    {
      cmd_decompose(state.config);
    }
    else if (*sweep)
    {
      cmd_sweep(state.config);
    }
    else if (*recon)
    {
      cmd_reconstruct(state.config);
    }
    return 0;
  }
  catch (const UsageError& e)
  {
    err << "usage error: " << e.what() << "\n";
    return 1;
  }
  catch (const std::exception& e)
  {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

} // namespace kmd::cli
