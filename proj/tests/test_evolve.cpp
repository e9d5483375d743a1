#include "doctest.h"
#include "oracles.hpp"

#include "frd/error.hpp"
#include "frd/evolve.hpp"
#include "frd/problem.hpp"
#include "frd/suite.hpp"

#include <cmath>
#include <random>

using namespace frd;

namespace {

Problem square(int refine = 2, bool lumped = false) {
  ProblemSpec ps;
  ps.refine = refine;
  ps.lumped_mass = lumped;
  ps.lumped_boundary = lumped;
  return build_problem(ps);
}

Problem koch(int generation = 1, int refine = 1) {
  ProblemSpec ps;
  ps.domain.family = DomainFamily::Koch;
  ps.domain.generation = generation;
  ps.refine = refine;
  return build_problem(ps);
}

FemFunction random_state(const Problem& p, unsigned seed, double amp = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-amp, amp);
  Vector x(static_cast<Eigen::Index>(p.mesh.node_count()));
  for (auto& v : x) v = u(rng);
  return p.op.prolong(p.op.restrict_vector(x));
}

EvolveOptions options(double dt, double T, Scheme scheme = Scheme::Imex) {
  EvolveOptions o;
  o.scheme = scheme;
  o.dt = dt;
  o.final_time = T;
  return o;
}

double mnorm(const SparseMatrix& M, const Vector& x) { return std::sqrt(x.dot(M * x)); }

}  // namespace

TEST_CASE("nonlinearity registry is self-consistent") {
  std::vector<Nonlinearity> all;
  for (const auto& name : nonlinearity_names()) all.push_back(make_nonlinearity(name));
  all.push_back(make_nonlinearity("linear", -2.5));
  for (const auto& f : all) {
    CAPTURE(f.name);
    CHECK(f.primitive(0.0) == 0.0);
    for (double s = -3.0; s <= 3.0; s += 0.37) {
      CHECK(f.derivative(s) == doctest::Approx(oracle::derivative(f.value, s)).epsilon(1e-6));
      CHECK(f.value(s) == doctest::Approx(oracle::derivative(f.primitive, s)).epsilon(1e-6));
      CHECK(f.derivative(s) >= -f.derivative_lower_bound - 1e-14);
    }
  }
  const Nonlinearity ci = make_nonlinearity("chaffee_infante");
  REQUIRE(ci.growth_exponent);
  for (double s = -10.0; s <= 10.0; s += 0.01) CHECK(ci.value(s) * s >= 0.5 * std::pow(std::abs(s), 4) - 0.5);
  CHECK(make_nonlinearity("linear", 3.0).liminf_ratio == 3.0);
  try {
    make_nonlinearity("quintic");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Config);
  }
}

TEST_CASE("IMEX damps an eigenvector by 1/(1 + dt lambda) per step") {
  const Problem p = square(2);
  const auto pairs = solve_eigs(p.op, p.M(), 3, EigenMethod::Dense);
  const Nonlinearity zero = make_nonlinearity("zero");
  for (const auto& pair : pairs) {
    const double dt = 0.05;
    const auto r = evolve(p.op, p.M(), pair.vector, zero, options(dt, 0.5));
    const double factor = std::pow(1.0 + dt * pair.lambda, -10.0);
    CHECK((r.final_state - factor * pair.vector).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(r.l2.back() == doctest::Approx(factor).epsilon(1e-9));
  }
}

TEST_CASE("the zero state is stationary") {
  const Problem p = koch();
  const Vector z = Vector::Zero(static_cast<Eigen::Index>(p.mesh.node_count()));
  for (auto scheme : {Scheme::Imex, Scheme::Implicit}) {
    const auto r = evolve(p.op, p.M(), z, make_nonlinearity("chaffee_infante"), options(0.05, 1.0, scheme));
    CHECK(r.final_state.cwiseAbs().maxCoeff() == 0.0);
    for (double e : r.en_residual) CHECK(e == 0.0);
  }
}

TEST_CASE("linear flow contracts the L2 norm") {
  const Problem p = koch(2, 1);
  const auto r = evolve(p.op, p.M(), random_state(p, 4), make_nonlinearity("zero"), options(0.01, 0.5));
  for (std::size_t k = 1; k < r.l2.size(); ++k) CHECK(r.l2[k] <= r.l2[k - 1] * (1 + 1e-12));
  for (std::size_t k = 1; k < r.energy.size(); ++k) CHECK(r.energy[k] <= r.energy[k - 1] * (1 + 1e-12));
}

TEST_CASE("implicit and IMEX agree when f vanishes") {
  const Problem p = koch();
  const FemFunction u0 = random_state(p, 8);
  const Nonlinearity none = make_nonlinearity("linear", 0.0);
  const auto a = evolve(p.op, p.M(), u0, none, options(0.02, 0.2));
  const auto b = evolve(p.op, p.M(), u0, none, options(0.02, 0.2, Scheme::Implicit));
  CHECK((a.final_state - b.final_state).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("implicit stepping failures") {
  const Problem p = square(1);
  const FemFunction u0 = random_state(p, 1);
  const Nonlinearity ci = make_nonlinearity("chaffee_infante");
  try {
    step_implicit(p.op, p.M(), u0, ci, 0.1, NewtonOptions{1e-12, 0});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Step);
  }
  // dt C_f >= 1 loses uniqueness of the implicit step
  try {
    evolve(p.op, p.M(), u0, make_nonlinearity("linear", -2.0), options(0.6, 1.0, Scheme::Implicit));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Config);
  }
  try {
    evolve(p.op, p.M(), u0, ci, options(2.0, 1.0));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Precondition);
  }
}

TEST_CASE("step count rounds T/dt up") {
  const Problem p = square(1);
  const FemFunction u0 = random_state(p, 2);
  const Nonlinearity zero = make_nonlinearity("zero");
  auto r = evolve(p.op, p.M(), u0, zero, options(0.1, 1.0));
  CHECK(r.steps() == 10);
  CHECK(r.time.back() == doctest::Approx(1.0));
  r = evolve(p.op, p.M(), u0, zero, options(0.3, 1.0));
  CHECK(r.steps() == 4);
  CHECK(r.time.back() == doctest::Approx(1.2));
  auto o = options(0.1, 1.0);
  o.snapshot_stride = 3;
  r = evolve(p.op, p.M(), u0, zero, o);
  std::vector<int> kept;
  for (const auto& s : r.snapshots) kept.push_back(s.first);
  CHECK(kept == std::vector<int>{0, 3, 6, 9, 10});
  o.snapshot_stride = 0;
  CHECK(evolve(p.op, p.M(), u0, zero, o).snapshots.size() == 2);
}

TEST_CASE("each step satisfies its discrete variational equation") {
  const Problem p = koch(2, 1);
  const FemFunction u0 = random_state(p, 5, 2.0);
  const Nonlinearity ci = make_nonlinearity("chaffee_infante");
  for (auto scheme : {Scheme::Imex, Scheme::Implicit}) {
    FemFunction u = u0;
    for (int k = 0; k < 5; ++k) {
      const FemFunction next =
          scheme == Scheme::Imex ? step_imex(p.op, p.M(), u, ci, 0.01) : step_implicit(p.op, p.M(), u, ci, 0.01).u;
      const Vector r = step_residual(p.op, p.M(), u, next, ci, 0.01, scheme);
      CHECK(r.norm() < 1e-8 * (1 + (p.M() * u).norm() / 0.01));
      u = next;
    }
  }
}

TEST_CASE("implicit scheme decreases the Lyapunov functional") {
  const Problem p = koch(2, 1);
  const auto r = evolve(p.op, p.M(), random_state(p, 6, 3.0), make_nonlinearity("chaffee_infante"),
                        options(0.02, 1.0, Scheme::Implicit));
  for (std::size_t k = 1; k < r.lyapunov.size(); ++k)
    CHECK(r.lyapunov[k] <= r.lyapunov[k - 1] + 1e-12 * (1 + std::abs(r.lyapunov[k - 1])));
  for (std::size_t k = 1; k < r.newton_iters.size(); ++k) CHECK(r.newton_iters[k] >= 1);
}

TEST_CASE("monotone reaction makes the implicit flow a contraction") {
  const Problem p = koch(1, 2);
  const Nonlinearity cubic = make_nonlinearity("cubic_plus");
  const auto a = evolve(p.op, p.M(), random_state(p, 10, 2.0), cubic, options(0.05, 1.0, Scheme::Implicit));
  const auto b = evolve(p.op, p.M(), random_state(p, 11, 2.0), cubic, options(0.05, 1.0, Scheme::Implicit));
  for (std::size_t k = 1; k < a.snapshots.size(); ++k) {
    const double now = mnorm(p.M(), a.snapshots[k].second - b.snapshots[k].second);
    const double before = mnorm(p.M(), a.snapshots[k - 1].second - b.snapshots[k - 1].second);
    CHECK(now <= before * (1 + 1e-10));
  }
}

TEST_CASE("order is preserved when the step matrix is an M-matrix") {
  const Problem p = square(2, true);
  const double dt = 0.01;
  REQUIRE(has_nonpositive_offdiagonal(p.op.restrict_matrix(p.M()) + dt * p.op.A_free, 1e-12));
  const Nonlinearity zero = make_nonlinearity("zero");
  const FemFunction v0 = random_state(p, 20);
  const FemFunction u0 = v0 + random_state(p, 21).cwiseAbs();
  const auto ru = evolve(p.op, p.M(), u0, zero, options(dt, 0.3));
  const auto rv = evolve(p.op, p.M(), v0, zero, options(dt, 0.3));
  for (std::size_t k = 0; k < ru.snapshots.size(); ++k)
    CHECK((ru.snapshots[k].second - rv.snapshots[k].second).minCoeff() >= -1e-12);
  for (std::size_t k = 1; k < rv.linf.size(); ++k) CHECK(rv.linf[k] <= rv.linf[k - 1] + 1e-12);
}

TEST_CASE("energy residual is first order in dt") {
  const Problem p = square(2);
  const auto pairs = solve_eigs(p.op, p.M(), 1);
  const double ratio =
      energy_order_ratio(p, make_nonlinearity("chaffee_infante"), pairs[0].vector, 0.02, 0.4);
  CHECK(ratio == doctest::Approx(2.0).epsilon(0.35));
}

TEST_CASE("spectral Galerkin on the full basis reproduces IMEX") {
  const Problem p = square(1);
  const auto n = static_cast<int>(p.op.free_count());
  const auto basis = solve_eigs(p.op, p.M(), n, EigenMethod::Dense);
  const FemFunction u0 = random_state(p, 30);
  const Nonlinearity ci = make_nonlinearity("chaffee_infante");
  const auto a = evolve(p.op, p.M(), u0, ci, options(0.01, 0.3));
  const auto b = evolve_spectral_galerkin(basis, p.op, p.M(), u0, ci, options(0.01, 0.3));
  CHECK((a.final_state - b.final_state).cwiseAbs().maxCoeff() < 1e-9);

  // a truncated basis keeps the state in its span
  const std::vector<EigenPair> few(basis.begin(), basis.begin() + 3);
  const auto c = evolve_spectral_galerkin(few, p.op, p.M(), u0, ci, options(0.01, 0.3));
  Vector residual = c.final_state;
  for (const auto& e : few) residual -= e.vector.dot(p.M() * c.final_state) * e.vector;
  CHECK(residual.cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("spectral Galerkin rejects bad bases") {
  const Problem p = square(1);
  const FemFunction u0 = random_state(p, 31);
  const Nonlinearity zero = make_nonlinearity("zero");
  auto kind = [&](std::vector<EigenPair> basis) {
    try {
      evolve_spectral_galerkin(basis, p.op, p.M(), u0, zero, options(0.1, 1.0));
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::Consistency;
  };
  CHECK(kind({}) == ErrorKind::Basis);
  auto basis = solve_eigs(p.op, p.M(), 2);
  basis[1].vector *= 2.0;
  CHECK(kind(basis) == ErrorKind::Basis);
  basis[1].vector = Vector::Ones(3);
  CHECK(kind(basis) == ErrorKind::Basis);
}

TEST_CASE("growing linear reaction blows up") {
  const Problem p = square(1);
  const FemFunction u0 = random_state(p, 40);
  try {
    evolve(p.op, p.M(), u0, make_nonlinearity("linear", -60.0), options(0.01, 5.0));
    FAIL("expected blow-up");
  } catch (const BlowUpError& e) {
    CHECK(e.kind() == ErrorKind::BlowUp);
    CHECK(e.last_finite_time() > 0);
    CHECK(e.last_finite_time() < 5.0);
    CHECK(exit_code(e.kind()) == 3);
  }
}

TEST_CASE("default time step follows the stiffest mode") {
  const Problem p = square(2);
  const Vector w = p.op.restrict_vector(lumped_weights(p.M()));
  const Eigen::MatrixXd Winv_half = w.cwiseInverse().cwiseSqrt().asDiagonal();
  const Eigen::MatrixXd S = Winv_half * Eigen::MatrixXd(p.op.A_free) * Winv_half;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  const double lambda_max = es.eigenvalues().maxCoeff();
  const double dt = default_time_step(p.op, p.M());
  CHECK(dt >= 0.1 / lambda_max * (1 - 1e-12));
  CHECK(dt <= 0.2 / lambda_max);
}
