#include "kmd/spdmd.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <thread>

#include "linalg.hpp"

namespace kmd
{

namespace
{

constexpr double kZeroAmplitude = 1e-12;
constexpr double kPolishCondLimit = 1e14;
constexpr double kHermitianTolerance = 1e-10;
constexpr double kIndefiniteTolerance = 1e-8;

} // namespace

double QuadraticForm::evaluate(const ComplexVector& b) const
{
  const double quad = b.dot(P * b).real(); // dot conjugates its first argument
  const double lin = 2.0 * q.dot(b).real();
  return quad - lin + s;
}

QuadraticForm quadratic_form(const RealMatrix& y, const ComplexMatrix& modes, const Vandermonde& xi)
{
  if (modes.rows() != y.rows() || modes.cols() != xi.data.rows() || xi.data.cols() != y.cols())
  {
    throw InputError("quadratic_form: incompatible shapes (Y " + std::to_string(y.rows()) + "x" +
                     std::to_string(y.cols()) + ", Phi " + std::to_string(modes.rows()) + "x" +
                     std::to_string(modes.cols()) + ", Xi " + std::to_string(xi.data.rows()) +
                     "x" + std::to_string(xi.data.cols()) + ")");
  }
  QuadraticForm form;
  const ComplexMatrix gram_modes = modes.adjoint() * modes;
  const ComplexMatrix gram_time = xi.data * xi.data.adjoint();
  form.P = gram_modes.cwiseProduct(gram_time.conjugate());
  form.P = (0.5 * (form.P + form.P.adjoint())).eval();

  // diag(Xi Y^* Phi)_i = sum_k Xi(i, k) (Y^T Phi)(k, i)
  const ComplexMatrix y_modes = y.transpose().cast<Complex>() * modes;
  const ComplexVector d = xi.data.cwiseProduct(y_modes.transpose()).rowwise().sum();
  form.q = d.conjugate();
  form.s = y.squaredNorm();
  return form;
}

Complex soft_threshold(Complex v, double threshold)
{
  const double mag = std::abs(v);
  if (mag <= threshold)
  {
    return {0.0, 0.0};
  }
  return v * ((mag - threshold) / mag);
}

AdmmSolver::AdmmSolver(const QuadraticForm& form, AdmmParams params)
  : form_(form), params_(params)
{
  if (params_.rho <= 0.0)
  {
    throw InputError("admm: rho must be positive");
  }
  const auto n = form.size();
  if (form.P.rows() != n || form.P.cols() != n)
  {
    throw InputError("admm: P and q sizes differ");
  }
  if (n == 0)
  {
    return;
  }
  const double scale = std::max(1.0, form.P.cwiseAbs().maxCoeff());
  if ((form.P - form.P.adjoint()).cwiseAbs().maxCoeff() > kHermitianTolerance * scale)
  {
    throw InputError("admm: quadratic form matrix is not Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(form.P, Eigen::EigenvaluesOnly);
  const RealVector& mu = eig.eigenvalues();
  if (mu(0) < -kIndefiniteTolerance * std::max(mu(n - 1), 0.0) || mu(n - 1) < 0.0)
  {
    throw InputError("admm: quadratic form matrix is indefinite");
  }

  ComplexMatrix k = 2.0 * form.P;
  k.diagonal().array() += params_.rho;
  factor_.compute(k);
  if (factor_.info() != Eigen::Success)
  {
    const double shift = 1e-12 * form.P.trace().real() / static_cast<double>(n);
    k.diagonal().array() += 2.0 * shift;
    factor_.compute(k);
    if (factor_.info() != Eigen::Success)
    {
      throw NumericalError("admm: Cholesky factorization of 2P + rho I failed");
    }
    warnings_.push_back("admm: regularized P by " + std::to_string(shift) + " I");
  }
}

AdmmResult AdmmSolver::solve(double gamma, const AdmmState* warm) const
{
  if (gamma < 0.0 || !std::isfinite(gamma))
  {
    throw InputError("admm: gamma must be a finite non-negative value");
  }
  const auto n = form_.size();
  AdmmResult out;
  if (gamma == 0.0)
  {
    // Without the l1 term the program is the plain normal system.
    const auto sol = detail::solve_psd_min_norm(form_.P, form_.q, kPolishCondLimit);
    out.b = sol.x;
    out.state = {sol.x, ComplexVector::Zero(n)};
    out.converged = true;
    return out;
  }

  const double rho = params_.rho;
  const double kappa = gamma / rho;
  const double sqrt_n = std::sqrt(static_cast<double>(n));
  ComplexVector z = ComplexVector::Zero(n);
  ComplexVector u = ComplexVector::Zero(n);
  if (warm && warm->z.size() == n && warm->u.size() == n)
  {
    z = warm->z;
    u = warm->u;
  }
  const ComplexVector two_q = 2.0 * form_.q;
  ComplexVector x(n);
  ComplexVector z_old(n);
  for (std::size_t it = 1; it <= params_.max_iter; ++it)
  {
    x = factor_.solve(two_q + rho * (z - u));
    z_old = z;
    for (Eigen::Index i = 0; i < n; ++i)
    {
      z(i) = soft_threshold(x(i) + u(i), kappa);
    }
    u += x - z;

    out.iterations = it;
    out.primal_residual = (x - z).norm();
    out.dual_residual = rho * (z - z_old).norm();
    const double eps_pri = sqrt_n * params_.eps_abs + params_.eps_rel * std::max(x.norm(), z.norm());
    const double eps_dual = sqrt_n * params_.eps_abs + params_.eps_rel * rho * u.norm();
    if (out.primal_residual < eps_pri && out.dual_residual < eps_dual)
    {
      out.converged = true;
      break;
    }
  }
  out.b = z;
  out.state = {z, u};
  return out;
}

AdmmResult admm_solve(const QuadraticForm& form, double gamma, const AdmmParams& params)
{
  return AdmmSolver(form, params).solve(gamma);
}

std::vector<Eigen::Index> support_of(const ComplexVector& b)
{
  std::vector<Eigen::Index> support;
  if (b.size() == 0)
  {
    return support;
  }
  const double max_abs = b.cwiseAbs().maxCoeff();
  if (max_abs == 0.0)
  {
    return support;
  }
  for (Eigen::Index i = 0; i < b.size(); ++i)
  {
    if (std::abs(b(i)) > kZeroAmplitude * max_abs)
    {
      support.push_back(i);
    }
  }
  return support;
}

ComplexVector polish(const QuadraticForm& form, std::span<const Eigen::Index> support,
                     Warnings* warnings)
{
  const auto n = form.size();
  ComplexVector b = ComplexVector::Zero(n);
  const auto m = static_cast<Eigen::Index>(support.size());
  if (m == 0)
  {
    return b;
  }
  // Eliminating the equality constraints b_i = 0 (i off support) from the
  // KKT system leaves P_SS b_S = q_S.
  ComplexMatrix p_ss(m, m);
  ComplexVector q_s(m);
  for (Eigen::Index a = 0; a < m; ++a)
  {
    const auto i = support[static_cast<std::size_t>(a)];
    if (i < 0 || i >= n)
    {
      throw InputError("polish: support index out of range");
    }
    q_s(a) = form.q(i);
    for (Eigen::Index c = 0; c < m; ++c)
    {
      p_ss(a, c) = form.P(i, support[static_cast<std::size_t>(c)]);
    }
  }
  const auto sol = detail::solve_psd_min_norm(p_ss, q_s, kPolishCondLimit);
  if (sol.truncated && warnings)
  {
    warnings->push_back("polish: singular restricted system, using minimum-norm amplitudes");
  }
  for (Eigen::Index a = 0; a < m; ++a)
  {
    b(support[static_cast<std::size_t>(a)]) = sol.x(a);
  }
  return b;
}

double performance_loss(double cost, double s)
{
  if (s <= 0.0)
  {
    throw InputError("performance_loss: reference cost must be positive");
  }
  if (cost < 0.0)
  {
    throw InputError("performance_loss: cost must be non-negative");
  }
  return 100.0 * std::sqrt(cost / s);
}

SparseSolution sparse_amplitudes(const AdmmSolver& solver, double gamma, const AdmmState* warm,
                                 AdmmState* state_out)
{
  const auto& form = solver.form();
  auto admm = solver.solve(gamma, warm);
  if (state_out)
  {
    *state_out = admm.state;
  }
  SparseSolution sol;
  sol.gamma = gamma;
  sol.iterations = admm.iterations;
  sol.converged = admm.converged;
  sol.b_sparse = std::move(admm.b);
  const auto candidate = support_of(sol.b_sparse);
  sol.b_polished = polish(form, candidate, &sol.warnings);
  for (const auto i : candidate)
  {
    if (std::abs(sol.b_polished(i)) > 0.0)
    {
      sol.support.push_back(i);
    }
  }
  sol.cardinality = sol.support.size();
  sol.cost = std::max(0.0, form.evaluate(sol.b_polished));
  sol.loss_percent = form.s > 0.0 ? performance_loss(sol.cost, form.s) : 0.0;
  if (!sol.converged)
  {
    sol.warnings.push_back("admm: no convergence within " + std::to_string(admm.iterations) +
                           " iterations at gamma " + std::to_string(gamma));
  }
  return sol;
}

std::vector<double> log_gamma_grid(double gamma_min, double gamma_max, std::size_t count)
{
  if (count == 0)
  {
    throw InputError("gamma grid needs at least one point");
  }
  if (gamma_min > gamma_max)
  {
    throw InputError("gamma_min exceeds gamma_max");
  }
  if (count == 1)
  {
    if (gamma_min < 0.0)
    {
      throw InputError("gamma must be non-negative");
    }
    return {gamma_min};
  }
  if (gamma_min <= 0.0)
  {
    throw InputError("log-spaced gamma grid needs gamma_min > 0");
  }
  std::vector<double> grid(count);
  const double lo = std::log(gamma_min);
  const double step = (std::log(gamma_max) - lo) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i)
  {
    grid[i] = std::exp(lo + step * static_cast<double>(i));
  }
  grid.front() = gamma_min;
  grid.back() = gamma_max;
  return grid;
}

SweepResult gamma_sweep(const QuadraticForm& form, std::vector<double> gammas,
                        const AdmmParams& params, const SweepOptions& options)
{
  if (gammas.empty())
  {
    throw InputError("gamma_sweep: empty gamma list");
  }
  for (const double g : gammas)
  {
    if (!(g >= 0.0) || !std::isfinite(g))
    {
      throw InputError("gamma_sweep: gammas must be finite and non-negative");
    }
  }
  std::sort(gammas.begin(), gammas.end());
  const AdmmSolver solver(form, params);

  SweepResult out;
  out.solutions.resize(gammas.size());
  if (options.warm_start)
  {
    AdmmState state;
    for (std::size_t i = 0; i < gammas.size(); ++i)
    {
      out.solutions[i] = sparse_amplitudes(solver, gammas[i], i == 0 ? nullptr : &state, &state);
    }
  }
  else
  {
    unsigned threads = options.threads ? options.threads : std::thread::hardware_concurrency();
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(gammas.size())));
    std::atomic<std::size_t> next{0};
    auto work = [&] {
      for (std::size_t i = next++; i < gammas.size(); i = next++)
      {
        out.solutions[i] = sparse_amplitudes(solver, gammas[i]);
      }
    };
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < threads; ++t)
    {
      pool.emplace_back(work);
    }
    work();
  }
  for (auto& sol : out.solutions)
  {
    sol.warnings.insert(sol.warnings.begin(), solver.warnings().begin(), solver.warnings().end());
    out.points.push_back({sol.gamma, sol.cardinality, sol.cost, sol.loss_percent});
  }
  return out;
}

std::vector<std::size_t> pareto_rows(const std::vector<ParetoPoint>& points)
{
  std::map<std::size_t, std::size_t, std::greater<>> best;
  for (std::size_t i = 0; i < points.size(); ++i)
  {
    const auto [it, inserted] = best.try_emplace(points[i].cardinality, i);
    if (!inserted && points[i].loss_percent < points[it->second].loss_percent)
    {
      it->second = i;
    }
  }
  std::vector<std::size_t> rows;
  for (const auto& [card, row] : best)
  {
    rows.push_back(row);
  }
  return rows;
}

DecompositionResult select_modes(const DecompositionResult& result, const SparseSolution& solution)
{
  if (solution.b_polished.size() != result.rank)
  {
    throw InputError("select_modes: solution size differs from the decomposition rank");
  }
  DecompositionResult full = result;
  full.amplitudes = solution.b_polished;
  auto selected = take_columns(full, solution.support);
  selected.method = Method::Spdmd;
  if (selected.rank == 0)
  {
    selected.warnings.push_back("select_modes: empty support, no modes selected");
    return selected;
  }
  return take_columns(selected, amplitude_order(selected));
}

} // namespace kmd
