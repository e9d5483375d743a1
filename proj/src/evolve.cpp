#include "frd/evolve.hpp"

#include "frd/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace frd {

std::string_view to_string(Scheme scheme) { return scheme == Scheme::Imex ? "imex" : "implicit"; }

Scheme parse_scheme(std::string_view name) {
  if (name == "imex") return Scheme::Imex;
  if (name == "implicit") return Scheme::Implicit;
  throw Error(ErrorKind::Config, "unknown scheme '" + std::string(name) + "'");
}

ImexStepper::ImexStepper(const AssembledOperator& op, const SparseMatrix& M, double dt)
    : op_(&op), M_(&M), M_free_(op.restrict_matrix(M)), dt_(dt) {
  if (!(dt > 0)) throw Error(ErrorKind::Precondition, "time step must be > 0");
  const SparseMatrix system = M_free_ + dt * op.A_free;
  factor_.compute(system);
  if (factor_.info() != Eigen::Success) throw Error(ErrorKind::Solver, "M + dt A is not positive definite");
}

FemFunction ImexStepper::step(const FemFunction& u, const Nonlinearity& f) const {
  const Vector v = op_->restrict_vector(u);
  const Vector rhs = M_free_ * v - dt_ * op_->restrict_vector(*M_ * f.apply(u));
  const Vector next = factor_.solve(rhs);
  if (factor_.info() != Eigen::Success || !next.allFinite())
    throw Error(ErrorKind::Solver, "IMEX solve failed");
  return op_->prolong(next);
}

ImplicitStepper::ImplicitStepper(const AssembledOperator& op, const SparseMatrix& M, double dt,
                                 const Nonlinearity& f, NewtonOptions newton)
    : op_(&op), f_(&f), M_free_(op.restrict_matrix(M)), dt_(dt), newton_(newton) {
  if (!(dt > 0)) throw Error(ErrorKind::Precondition, "time step must be > 0");
  if (!(dt * f.derivative_lower_bound < 1.0)) {
    std::ostringstream os;
    os << "implicit step needs dt * C_f < 1 (dt = " << dt << ", C_f = " << f.derivative_lower_bound << ")";
    throw Error(ErrorKind::Config, os.str());
  }
  base_ = M_free_ / dt + op.A_free;
  weights_ = op.restrict_vector(lumped_weights(M));
}

ImplicitStepResult ImplicitStepper::step(const FemFunction& u) const {
  const Vector v_prev = op_->restrict_vector(u);
  const Vector shift = M_free_ * v_prev / dt_;
  auto residual = [&](const Vector& v) -> Vector {
    return base_ * v - shift + weights_.cwiseProduct(f_->apply(v));
  };
  auto objective = [&](const Vector& v) {
    const Vector d = v - v_prev;
    double potential = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) potential += weights_[i] * f_->primitive(v[i]);
    return 0.5 * d.dot(M_free_ * d) / dt_ + 0.5 * v.dot(op_->A_free * v) + potential;
  };

  Eigen::SimplicialLDLT<SparseMatrix> solver;
  solver.analyzePattern(base_);
  Vector v = v_prev;
  Vector g = residual(v);
  double gnorm = g.norm();
  for (int it = 0;; ++it) {
    if (gnorm < newton_.tol) return {op_->prolong(v), it, gnorm};
    if (it >= newton_.max_iter) break;

    SparseMatrix jac = base_;
    const Vector curvature = weights_.cwiseProduct(f_->apply_derivative(v));
    for (Eigen::Index i = 0; i < v.size(); ++i) jac.coeffRef(i, i) += curvature[i];
    solver.factorize(jac);
    Vector delta;
    if (solver.info() == Eigen::Success) delta = -solver.solve(g);
    double slope = delta.size() ? g.dot(delta) : 0.0;
    if (!delta.allFinite() || !(slope < 0)) {
      delta = -g;
      slope = -gnorm * gnorm;
    }
    const double phi = objective(v);
    const double slack = 1e-13 * (1.0 + std::abs(phi));
    double alpha = 1.0;
    for (int halving = 0; halving < 30; ++halving) {
      if (objective(v + alpha * delta) <= phi + 1e-4 * alpha * slope + slack) break;
      alpha *= 0.5;
    }
    v += alpha * delta;
    g = residual(v);
    gnorm = g.norm();
    if (!std::isfinite(gnorm)) break;
  }
  std::ostringstream os;
  os.precision(6);
  os << "Newton did not reach tolerance " << newton_.tol << " in " << newton_.max_iter
     << " iterations; last residual " << gnorm;
  throw Error(ErrorKind::Step, os.str());
}

FemFunction step_imex(const AssembledOperator& op, const SparseMatrix& M, const FemFunction& u,
                      const Nonlinearity& f, double dt) {
  return ImexStepper(op, M, dt).step(u, f);
}

ImplicitStepResult step_implicit(const AssembledOperator& op, const SparseMatrix& M, const FemFunction& u,
                                 const Nonlinearity& f, double dt, NewtonOptions newton) {
  return ImplicitStepper(op, M, dt, f, newton).step(u);
}

Vector reaction_load(const SparseMatrix& M, const FemFunction& u_prev, const FemFunction& u_next,
                     const Nonlinearity& f, Scheme scheme) {
  if (scheme == Scheme::Imex) return M * f.apply(u_prev);
  return lumped_weights(M).cwiseProduct(f.apply(u_next));
}

Vector step_residual(const AssembledOperator& op, const SparseMatrix& M, const FemFunction& u_prev,
                     const FemFunction& u_next, const Nonlinearity& f, double dt, Scheme scheme) {
  const Vector full = M * (u_next - u_prev) / dt + op.A * u_next + reaction_load(M, u_prev, u_next, f, scheme);
  return op.prolong(op.restrict_vector(full));
}

namespace {

struct Diagnostics {
  const AssembledOperator& op;
  const SparseMatrix& M;
  Vector weights;
  const Nonlinearity& f;

  void record(TrajectoryRecord& rec, double t, const Vector& u) const {
    const double form = u.dot(op.A * u);
    double potential = 0.0;
    for (Eigen::Index i = 0; i < u.size(); ++i) potential += weights[i] * f.primitive(u[i]);
    rec.time.push_back(t);
    rec.l2.push_back(std::sqrt(std::max(0.0, u.dot(M * u))));
    rec.linf.push_back(u.size() ? u.cwiseAbs().maxCoeff() : 0.0);
    rec.energy.push_back(form);
    rec.lyapunov.push_back(0.5 * form + potential);
  }

  // (|u_{n+1}|^2 - |u_n|^2) / (2 dt) + a(u_{n+1}, u_{n+1}) + (g, u_{n+1})
  double energy_defect(const Vector& prev, const Vector& next, const Vector& load, double dt) const {
    const double dnorm = 0.5 * (next.dot(M * next) - prev.dot(M * prev)) / dt;
    return std::abs(dnorm + next.dot(op.A * next) + load.dot(next));
  }
};

std::size_t step_count(const EvolveOptions& options) {
  if (!(options.final_time > 0)) throw Error(ErrorKind::Precondition, "final time must be > 0");
  if (!(options.dt > 0) || !(options.dt < options.final_time))
    throw Error(ErrorKind::Precondition, "need 0 < dt < T");
  return static_cast<std::size_t>(std::ceil(options.final_time / options.dt - 1e-9));
}

bool keep_snapshot(const EvolveOptions& options, std::size_t k, std::size_t total) {
  if (k == 0 || k == total) return true;
  return options.snapshot_stride > 0 && k % static_cast<std::size_t>(options.snapshot_stride) == 0;
}

}  // namespace

TrajectoryRecord evolve(const AssembledOperator& op, const SparseMatrix& M, const FemFunction& u0,
                        const Nonlinearity& f, const EvolveOptions& options) {
  const std::size_t steps = step_count(options);
  if (u0.size() != static_cast<Eigen::Index>(op.node_count()))
    throw Error(ErrorKind::Consistency, "initial state does not match the node count");
  const double dt = options.dt;
  const Diagnostics diag{op, M, lumped_weights(M), f};

  std::unique_ptr<ImexStepper> imex;
  std::unique_ptr<ImplicitStepper> implicit;
  if (options.scheme == Scheme::Imex)
    imex = std::make_unique<ImexStepper>(op, M, dt);
  else
    implicit = std::make_unique<ImplicitStepper>(op, M, dt, f, options.newton);

  TrajectoryRecord rec;
  rec.dt = dt;
  Vector u = op.prolong(op.restrict_vector(u0));
  diag.record(rec, 0.0, u);
  rec.en_residual.push_back(0.0);
  rec.dudt.push_back(0.0);
  rec.newton_iters.push_back(0);
  rec.snapshots.emplace_back(0, u);

  for (std::size_t k = 1; k <= steps; ++k) {
    Vector next;
    int iterations = 0;
    try {
      if (imex) {
        next = imex->step(u, f);
      } else {
        ImplicitStepResult r = implicit->step(u);
        next = std::move(r.u);
        iterations = r.iterations;
      }
    } catch (const Error& e) {
      throw Error(e.kind(), "step " + std::to_string(k) + ": " + e.detail());
    }
    const double t = static_cast<double>(k) * dt;
    const double linf = next.size() ? next.cwiseAbs().maxCoeff() : 0.0;
    if (!std::isfinite(linf) || linf > options.blowup_threshold) throw BlowUpError(t - dt, linf);

    const Vector load = op.prolong(op.restrict_vector(reaction_load(M, u, next, f, options.scheme)));
    diag.record(rec, t, next);
    rec.en_residual.push_back(diag.energy_defect(u, next, load, dt));
    const Vector jump = next - u;
    rec.dudt.push_back(std::sqrt(std::max(0.0, jump.dot(M * jump))) / dt);
    rec.newton_iters.push_back(iterations);
    u = std::move(next);
    if (keep_snapshot(options, k, steps)) rec.snapshots.emplace_back(static_cast<int>(k), u);
  }
  rec.final_state = u;
  return rec;
}

TrajectoryRecord evolve_spectral_galerkin(std::span<const EigenPair> basis, const AssembledOperator& op,
                                          const SparseMatrix& M, const FemFunction& u0, const Nonlinearity& f,
                                          const EvolveOptions& options) {
  if (basis.empty()) throw Error(ErrorKind::Basis, "spectral Galerkin needs at least one eigenpair");
  const std::size_t steps = step_count(options);
  const Eigen::Index n = static_cast<Eigen::Index>(op.node_count());
  const Eigen::Index m = static_cast<Eigen::Index>(basis.size());
  Eigen::MatrixXd Xi(n, m);
  Vector lambda(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    if (basis[j].vector.size() != n) throw Error(ErrorKind::Basis, "eigenvector length differs from node count");
    Xi.col(j) = basis[j].vector;
    lambda[j] = basis[j].lambda;
  }
  const Eigen::MatrixXd MXi = M * Xi;
  const double gram_defect = (Xi.transpose() * MXi - Eigen::MatrixXd::Identity(m, m)).cwiseAbs().maxCoeff();
  if (gram_defect > 1e-8) {
    std::ostringstream os;
    os << "basis is not M-orthonormal (Gram residual " << gram_defect << ")";
    throw Error(ErrorKind::Basis, os.str());
  }

  const double dt = options.dt;
  const Diagnostics diag{op, M, lumped_weights(M), f};
  const Vector damping = (Vector::Ones(m) + dt * lambda).cwiseInverse();

  TrajectoryRecord rec;
  rec.dt = dt;
  Vector coeff = MXi.transpose() * u0;
  Vector u = Xi * coeff;
  diag.record(rec, 0.0, u);
  rec.en_residual.push_back(0.0);
  rec.dudt.push_back(0.0);
  rec.newton_iters.push_back(0);
  rec.snapshots.emplace_back(0, u);
  for (std::size_t k = 1; k <= steps; ++k) {
    const Vector forcing = MXi.transpose() * f.apply(u);
    coeff = damping.cwiseProduct(coeff - dt * forcing);
    Vector next = Xi * coeff;
    const double t = static_cast<double>(k) * dt;
    const double linf = next.cwiseAbs().maxCoeff();
    if (!std::isfinite(linf) || linf > options.blowup_threshold) throw BlowUpError(t - dt, linf);
    const Vector load = op.prolong(op.restrict_vector(M * f.apply(u)));
    diag.record(rec, t, next);
    rec.en_residual.push_back(diag.energy_defect(u, next, load, dt));
    const Vector jump = next - u;
    rec.dudt.push_back(std::sqrt(std::max(0.0, jump.dot(M * jump))) / dt);
    rec.newton_iters.push_back(0);
    u = std::move(next);
    if (keep_snapshot(options, k, steps)) rec.snapshots.emplace_back(static_cast<int>(k), u);
  }
  rec.final_state = u;
  return rec;
}

double default_time_step(const AssembledOperator& op, const SparseMatrix& M) {
  const Vector w = op.restrict_vector(lumped_weights(M));
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> uni(0.5, 1.5);
  Vector x(w.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = (i % 2 ? -1.0 : 1.0) * uni(rng);
  double lambda = 0.0;
  for (int it = 0; it < 20; ++it) {
    const Vector ax = op.A_free * x;
    lambda = x.dot(ax) / x.dot(w.cwiseProduct(x));
    x = ax.cwiseQuotient(w);
    x /= x.norm();
  }
  if (!(lambda > 0)) throw Error(ErrorKind::Solver, "could not estimate the largest eigenvalue");
  return 0.1 / lambda;
}

}  // namespace frd
