#pragma once

#include "frd/evolve.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace frd {

struct LyapunovValue {
  double form_part = 0;       // x^T A x / 2
  double potential_part = 0;  // sum_i m_i F(x_i)
  double total = 0;
};

/// L(x) with lumped-mass quadrature of F; `M` may be consistent or lumped,
/// only its row sums are used.
LyapunovValue lyapunov(const AssembledOperator& op, const SparseMatrix& M, const FemFunction& x,
                       const Nonlinearity& f);

struct EquilibriumResult {
  FemFunction state;
  double residual = 0;  // |A x + M f(x)| on free nodes
  int iterations = 0;
  /// Smallest eigenvalue of A + sym(M diag f'(x)) relative to M.
  double min_linearized_eigenvalue = 0;
  bool stable = false;
};

/// Newton on R(x) = A x + M f(x) with halving line search on |R|.
EquilibriumResult find_equilibrium(const AssembledOperator& op, const SparseMatrix& M, const Nonlinearity& f,
                                   const FemFunction& x_init, double tol = 1e-10, int max_iter = 100);

/// Smallest eigenvalue of the symmetrized linearization at x.
double linearized_min_eigenvalue(const AssembledOperator& op, const SparseMatrix& M, const Nonlinearity& f,
                                 const FemFunction& x);

/// Keeps the first of any group of states closer than min_distance in L^2.
std::vector<EquilibriumResult> deduplicate(std::vector<EquilibriumResult> found, const SparseMatrix& M,
                                           double min_distance = 1e-4);

struct ConvergenceReport {
  double initial_dudt = 0;
  double final_dudt = 0;
  int nearest = -1;             // index into the equilibrium set, -1 if none
  double nearest_distance = 0;  // L^2 distance of the final state
  std::optional<double> rate;   // fitted exponential rate of the distance
  bool degenerate = false;
  std::string note;
};

/// Distance decay toward the equilibrium nearest the final state, fitted by
/// log-linear regression over the snapshots in the second half of the run.
ConvergenceReport probe_convergence(const TrajectoryRecord& traj, std::span<const EquilibriumResult> equilibria,
                                    const SparseMatrix& M);

/// sup_{t >= tau'} |u(t)|_inf / sup_{s >= tau} |u(s)|_{L^2}.
double smoothing_ratio(const TrajectoryRecord& traj, double tau, double tau_prime);

/// Empirical Hoelder exponent in time of the sup norm: the log-log slope of
/// max_i |u(t_{i+j}) - u(t_i)|_inf against the lag, over dyadic snapshot lags
/// up to a quarter of the run. Empty when fewer than two lags are usable.
std::optional<double> holder_exponent(const TrajectoryRecord& traj);

/// Slope of least-squares fit of y against x.
double fit_slope(std::span<const double> x, std::span<const double> y);

}  // namespace frd
