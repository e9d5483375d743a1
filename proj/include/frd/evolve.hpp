#pragma once

// Time integration of M u' + A u + M f(u) = 0 on the free nodes.
//
// IMEX:     (M + dt A) u_{n+1} = M u_n - dt M f(u_n)
// implicit: M (u_{n+1} - u_n)/dt + A u_{n+1} + W f(u_{n+1}) = 0,
//           W the lumped weights of M, solved by damped Newton.
//
// The implicit step minimizes |u - u_n|^2_M / (2 dt) + L(u), where
// L(u) = u^T A u / 2 + sum_i W_i F(u_i), so L never increases along it.

#include "frd/nonlinearity.hpp"
#include "frd/spectrum.hpp"

#include <Eigen/SparseCholesky>

#include <memory>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace frd {

enum class Scheme { Imex, Implicit };

std::string_view to_string(Scheme scheme);
Scheme parse_scheme(std::string_view name);

struct NewtonOptions {
  double tol = 1e-10;
  int max_iter = 50;
};

class ImexStepper {
 public:
  ImexStepper(const AssembledOperator& op, const SparseMatrix& M, double dt);
  FemFunction step(const FemFunction& u, const Nonlinearity& f) const;

 private:
  const AssembledOperator* op_;
  const SparseMatrix* M_;
  SparseMatrix M_free_;
  double dt_;
  Eigen::SimplicialLLT<SparseMatrix> factor_;
};

struct ImplicitStepResult {
  FemFunction u;
  int iterations = 0;
  double residual = 0;
};

class ImplicitStepper {
 public:
  ImplicitStepper(const AssembledOperator& op, const SparseMatrix& M, double dt, const Nonlinearity& f,
                  NewtonOptions newton = {});
  ImplicitStepResult step(const FemFunction& u) const;

 private:
  const AssembledOperator* op_;
  const Nonlinearity* f_;
  SparseMatrix M_free_;
  SparseMatrix base_;  // M_free / dt + A_free
  Vector weights_;     // lumped weights on free nodes
  double dt_;
  NewtonOptions newton_;
};

FemFunction step_imex(const AssembledOperator& op, const SparseMatrix& M, const FemFunction& u,
                      const Nonlinearity& f, double dt);

ImplicitStepResult step_implicit(const AssembledOperator& op, const SparseMatrix& M, const FemFunction& u,
                                 const Nonlinearity& f, double dt, NewtonOptions newton = {});

/// Reaction load the scheme pairs with the step: M f(u_n) for IMEX and
/// W f(u_{n+1}) for the implicit scheme (full nodal vector).
Vector reaction_load(const SparseMatrix& M, const FemFunction& u_prev, const FemFunction& u_next,
                     const Nonlinearity& f, Scheme scheme);

/// Discrete variational residual M (u_{n+1} - u_n)/dt + A u_{n+1} + reaction,
/// restricted to free nodes (zero on Dirichlet nodes).
Vector step_residual(const AssembledOperator& op, const SparseMatrix& M, const FemFunction& u_prev,
                     const FemFunction& u_next, const Nonlinearity& f, double dt, Scheme scheme);

struct TrajectoryRecord {
  double dt = 0;
  std::vector<double> time;
  std::vector<double> l2;
  std::vector<double> linf;
  std::vector<double> energy;       // u^T A u
  std::vector<double> lyapunov;
  std::vector<double> en_residual;  // energy-identity defect per unit time
  std::vector<double> dudt;         // |u_{n+1} - u_n|_M / dt
  std::vector<int> newton_iters;
  std::vector<std::pair<int, FemFunction>> snapshots;
  FemFunction final_state;

  /// Row 0 holds the initial state.
  std::size_t steps() const { return time.empty() ? 0 : time.size() - 1; }
};

struct EvolveOptions {
  Scheme scheme = Scheme::Imex;
  double dt = 1e-3;
  double final_time = 1.0;
  int snapshot_stride = 1;  // 0 keeps only the first and last states
  NewtonOptions newton;
  double blowup_threshold = 1e6;
};

TrajectoryRecord evolve(const AssembledOperator& op, const SparseMatrix& M, const FemFunction& u0,
                        const Nonlinearity& f, const EvolveOptions& options);

/// IMEX in the coefficient space of an M-orthonormal eigenbasis.
TrajectoryRecord evolve_spectral_galerkin(std::span<const EigenPair> basis, const AssembledOperator& op,
                                          const SparseMatrix& M, const FemFunction& u0, const Nonlinearity& f,
                                          const EvolveOptions& options);

/// 0.1 / lambda_max, lambda_max from 20 power iterations on W^{-1} A.
double default_time_step(const AssembledOperator& op, const SparseMatrix& M);

}  // namespace frd
