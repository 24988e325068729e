#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "kmd/dmd.hpp"
#include "kmd/types.hpp"

namespace kmd
{

/// ||Y - Phi diag(b) Xi||_F^2 written as b^* P b - q^* b - b^* q + s, with
///   P = (Phi^* Phi) o conj(Xi Xi^*),  q = conj(diag(Xi Y^* Phi)),  s = ||Y||_F^2.
struct QuadraticForm
{
  ComplexMatrix P;
  ComplexVector q;
  double s = 0.0;

  Eigen::Index size() const { return q.size(); }
  double evaluate(const ComplexVector& b) const;
};

QuadraticForm quadratic_form(const RealMatrix& y, const ComplexMatrix& modes, const Vandermonde& xi);

struct AdmmParams
{
  double rho = 1.0;
  double eps_abs = 1e-6;
  double eps_rel = 1e-4;
  std::size_t max_iter = 10000;
};

/// Iterate carried between solves for warm starting.
struct AdmmState
{
  ComplexVector z;
  ComplexVector u;
};

struct AdmmResult
{
  /// Thresholded iterate; exactly zero off its support.
  ComplexVector b;
  AdmmState state;
  std::size_t iterations = 0;
  bool converged = false;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
};

/// Alternating-direction solver for
///   min_b  b^* P b - q^* b - b^* q + s + gamma * sum_i |b_i|.
/// The x-update system (2P + rho I) is factored once and reused across
/// gamma values. The form is referenced, not copied, and must outlive the
/// solver.
class AdmmSolver
{
public:
  AdmmSolver(const QuadraticForm& form, AdmmParams params = {});

  AdmmResult solve(double gamma, const AdmmState* warm = nullptr) const;

  const AdmmParams& params() const { return params_; }
  const QuadraticForm& form() const { return form_; }
  const Warnings& warnings() const { return warnings_; }

private:
  const QuadraticForm& form_;
  AdmmParams params_;
  Eigen::LLT<ComplexMatrix> factor_;
  Warnings warnings_;
};

AdmmResult admm_solve(const QuadraticForm& form, double gamma, const AdmmParams& params = {});

/// |v| shrunk by `threshold`, phase preserved.
Complex soft_threshold(Complex v, double threshold);

/// Indices with |b_i| > 1e-12 * max_j |b_j|, ascending.
std::vector<Eigen::Index> support_of(const ComplexVector& b);

/// Minimizer of the quadratic form with b_i = 0 off `support`.
ComplexVector polish(const QuadraticForm& form, std::span<const Eigen::Index> support,
                     Warnings* warnings = nullptr);

/// 100 * sqrt(cost / s).
double performance_loss(double cost, double s);

struct SparseSolution
{
  ComplexVector b_sparse;
  ComplexVector b_polished;
  std::vector<Eigen::Index> support;
  double gamma = 0.0;
  std::size_t cardinality = 0;
  double cost = 0.0;
  double loss_percent = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  Warnings warnings;
};

struct ParetoPoint
{
  double gamma = 0.0;
  std::size_t cardinality = 0;
  double cost = 0.0;
  double loss_percent = 0.0;
};

/// ADMM solve followed by polishing on the detected support.
SparseSolution sparse_amplitudes(const AdmmSolver& solver, double gamma,
                                 const AdmmState* warm = nullptr, AdmmState* state_out = nullptr);

struct SweepOptions
{
  bool warm_start = true;
  /// Worker threads used when warm starting is off; 0 picks the hardware count.
  unsigned threads = 0;
};

struct SweepResult
{
  std::vector<ParetoPoint> points;
  std::vector<SparseSolution> solutions;
};

/// Solves every gamma (sorted ascending). Non-convergence is flagged per
/// point and never aborts the sweep.
SweepResult gamma_sweep(const QuadraticForm& form, std::vector<double> gammas,
                        const AdmmParams& params = {}, const SweepOptions& options = {});

/// Geometric sequence from gamma_min to gamma_max inclusive.
std::vector<double> log_gamma_grid(double gamma_min, double gamma_max, std::size_t count);

/// Keeps the loss-minimal point for each cardinality, ordered by
/// descending cardinality.
std::vector<std::size_t> pareto_rows(const std::vector<ParetoPoint>& points);

/// Restricts a decomposition to the solution's support using the polished
/// amplitudes; columns are re-sorted by |b| and the method becomes spdmd.
DecompositionResult select_modes(const DecompositionResult& result, const SparseSolution& solution);

} // namespace kmd
