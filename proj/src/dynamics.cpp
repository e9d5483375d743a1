#include "frd/dynamics.hpp"

#include "frd/error.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace frd {

LyapunovValue lyapunov(const AssembledOperator& op, const SparseMatrix& M, const FemFunction& x,
                       const Nonlinearity& f) {
  if (x.size() != static_cast<Eigen::Index>(op.node_count()))
    throw Error(ErrorKind::Consistency, "state does not match the node count");
  const Vector w = lumped_weights(M);
  LyapunovValue v;
  v.form_part = 0.5 * x.dot(op.A * x);
  for (Eigen::Index i = 0; i < x.size(); ++i) v.potential_part += w[i] * f.primitive(x[i]);
  v.total = v.form_part + v.potential_part;
  return v;
}

namespace {

SparseMatrix with_diagonal_scaling(const SparseMatrix& M, const Vector& d) {
  // M diag(d)
  SparseMatrix r = M;
  for (Eigen::Index k = 0; k < r.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(r, k); it; ++it) it.valueRef() *= d[it.col()];
  return r;
}

}  // namespace

double linearized_min_eigenvalue(const AssembledOperator& op, const SparseMatrix& M, const Nonlinearity& f,
                                 const FemFunction& x) {
  const Vector d = f.apply_derivative(x);
  const SparseMatrix MD = with_diagonal_scaling(M, d);
  const SparseMatrix sym = 0.5 * (MD + SparseMatrix(MD.transpose()));
  const SparseMatrix S = op.restrict_matrix(op.A + sym);
  const SparseMatrix M_free = op.restrict_matrix(M);
  const double shift = std::min(0.0, d.minCoeff()) - 1.0;
  return smallest_eigenpairs(S, M_free, 1, EigenMethod::Auto, shift).values[0];
}

EquilibriumResult find_equilibrium(const AssembledOperator& op, const SparseMatrix& M, const Nonlinearity& f,
                                   const FemFunction& x_init, double tol, int max_iter) {
  if (x_init.size() != static_cast<Eigen::Index>(op.node_count()))
    throw Error(ErrorKind::Consistency, "initial guess does not match the node count");
  auto residual = [&](const Vector& v) -> Vector {
    const Vector u = op.prolong(v);
    return op.A_free * v + op.restrict_vector(M * f.apply(u));
  };

  Vector v = op.restrict_vector(x_init);
  Vector r = residual(v);
  double rnorm = r.norm();
  int it = 0;
  Eigen::SparseLU<SparseMatrix> lu;
  while (rnorm > tol) {
    if (it >= max_iter) {
      std::ostringstream os;
      os << "equilibrium Newton hit " << max_iter << " iterations; final residual " << rnorm;
      throw Error(ErrorKind::NonConvergence, os.str());
    }
    ++it;
    const SparseMatrix J = op.A_free + op.restrict_matrix(with_diagonal_scaling(M, f.apply_derivative(op.prolong(v))));
    lu.compute(J);
    if (lu.info() != Eigen::Success) throw Error(ErrorKind::NonConvergence, "singular Jacobian in equilibrium Newton");
    const Vector delta = -lu.solve(r);
    double alpha = 1.0;
    Vector trial = v + delta;
    Vector trial_r = residual(trial);
    for (int halving = 0; halving < 30 && !(trial_r.norm() < rnorm); ++halving) {
      alpha *= 0.5;
      trial = v + alpha * delta;
      trial_r = residual(trial);
    }
    v = std::move(trial);
    r = std::move(trial_r);
    rnorm = r.norm();
    if (!std::isfinite(rnorm)) throw Error(ErrorKind::NonConvergence, "equilibrium Newton diverged");
  }

  EquilibriumResult res;
  res.state = op.prolong(v);
  res.residual = rnorm;
  res.iterations = it;
  res.min_linearized_eigenvalue = linearized_min_eigenvalue(op, M, f, res.state);
  res.stable = res.min_linearized_eigenvalue > 0;
  return res;
}

std::vector<EquilibriumResult> deduplicate(std::vector<EquilibriumResult> found, const SparseMatrix& M,
                                           double min_distance) {
  std::vector<EquilibriumResult> kept;
  for (auto& candidate : found) {
    bool duplicate = false;
    for (const auto& k : kept) {
      const Vector d = candidate.state - k.state;
      if (std::sqrt(std::max(0.0, d.dot(M * d))) <= min_distance) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate) kept.push_back(std::move(candidate));
  }
  return kept;
}

double fit_slope(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = std::min(x.size(), y.size());
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx > 0 ? sxy / sxx : std::numeric_limits<double>::quiet_NaN();
}

ConvergenceReport probe_convergence(const TrajectoryRecord& traj, std::span<const EquilibriumResult> equilibria,
                                    const SparseMatrix& M) {
  ConvergenceReport rep;
  if (traj.steps() == 0 || traj.snapshots.empty()) {
    rep.note = "empty trajectory";
    return rep;
  }
  rep.initial_dudt = traj.dudt[1];
  rep.final_dudt = traj.dudt.back();

  auto distance = [&](const Vector& a, const Vector& b) {
    const Vector d = a - b;
    return std::sqrt(std::max(0.0, d.dot(M * d)));
  };
  Vector reference = traj.final_state;
  if (!equilibria.empty()) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < equilibria.size(); ++k) {
      const double d = distance(traj.final_state, equilibria[k].state);
      if (d < best) {
        best = d;
        rep.nearest = static_cast<int>(k);
      }
    }
    rep.nearest_distance = best;
    reference = equilibria[rep.nearest].state;
  } else {
    rep.note = "no equilibria supplied; distances measured to the final state";
  }

  const double final_time = traj.time.back();
  const double floor = 1e-10 * (1.0 + std::sqrt(std::max(0.0, reference.dot(M * reference))));
  double max_distance = 0.0;
  std::vector<double> ts, logs;
  for (const auto& [step, state] : traj.snapshots) {
    const double d = distance(state, reference);
    max_distance = std::max(max_distance, d);
    const double t = traj.time[static_cast<std::size_t>(step)];
    if (t >= 0.5 * final_time && d > floor) {
      ts.push_back(t);
      logs.push_back(std::log(d));
    }
  }
  if (max_distance <= floor) {
    rep.degenerate = true;
    rep.note = "degenerate: zero distance";
    return rep;
  }
  if (ts.size() >= 2) rep.rate = -fit_slope(ts, logs);
  else if (rep.note.empty()) rep.note = "too few snapshots above the distance floor to fit a rate";
  return rep;
}

double smoothing_ratio(const TrajectoryRecord& traj, double tau, double tau_prime) {
  if (traj.time.empty()) throw Error(ErrorKind::Precondition, "empty trajectory");
  if (!(tau < tau_prime) || !(tau_prime < traj.time.back()))
    throw Error(ErrorKind::Precondition, "need tau < tau' < final time");
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < traj.time.size(); ++k) {
    if (traj.time[k] >= tau_prime) num = std::max(num, traj.linf[k]);
    if (traj.time[k] >= tau) den = std::max(den, traj.l2[k]);
  }
  if (!(den > 0)) throw Error(ErrorKind::DegenerateInput, "L^2 norm vanishes after tau");
  return num / den;
}

std::optional<double> holder_exponent(const TrajectoryRecord& traj) {
  const auto& snaps = traj.snapshots;
  if (snaps.size() < 3 || traj.time.empty()) return std::nullopt;
  const double horizon = 0.25 * traj.time.back();
  std::vector<double> log_lag, log_diff;
  for (std::size_t j = 1; j < snaps.size(); j *= 2) {
    double lag = 0, diff = 0;
    for (std::size_t i = 0; i + j < snaps.size(); ++i) {
      const double dt = traj.time[static_cast<std::size_t>(snaps[i + j].first)] -
                        traj.time[static_cast<std::size_t>(snaps[i].first)];
      lag = std::max(lag, dt);
      diff = std::max(diff, (snaps[i + j].second - snaps[i].second).cwiseAbs().maxCoeff());
    }
    if (lag > horizon) break;
    if (lag > 0 && diff > 0) {
      log_lag.push_back(std::log(lag));
      log_diff.push_back(std::log(diff));
    }
  }
  if (log_lag.size() < 2) return std::nullopt;
  return fit_slope(log_lag, log_diff);
}

}  // namespace frd
