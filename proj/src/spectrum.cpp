#include "frd/spectrum.hpp"

#include "frd/error.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace frd {

namespace {

double inf_norm(const SparseMatrix& m) {
  Vector rows = Vector::Zero(m.rows());
  for (Eigen::Index k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) rows[it.row()] += std::abs(it.value());
  return rows.size() ? rows.maxCoeff() : 0.0;
}

GeneralizedEigen dense_eigs(const SparseMatrix& A, const SparseMatrix& M, int k) {
  const Eigen::MatrixXd Ad(A);
  const Eigen::MatrixXd Md(M);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(Ad, Md);
  if (solver.info() != Eigen::Success)
    throw Error(ErrorKind::Solver, "dense generalized eigensolve failed; mass matrix not positive definite?");
  return {solver.eigenvalues().head(k), solver.eigenvectors().leftCols(k)};
}

GeneralizedEigen shift_invert_eigs(const SparseMatrix& A, const SparseMatrix& M, int k, double shift) {
  const Eigen::Index n = A.rows();
  const Eigen::Index p = std::min<Eigen::Index>(n, std::max<Eigen::Index>(2 * k, k + 8));
  const SparseMatrix C = A - shift * M;
  Eigen::SimplicialLDLT<SparseMatrix> factor(C);
  if (factor.info() != Eigen::Success) throw Error(ErrorKind::Solver, "shift-invert factorization failed");

  std::mt19937_64 rng(0x5eed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Eigen::MatrixXd X(n, p);
  for (Eigen::Index j = 0; j < p; ++j)
    for (Eigen::Index i = 0; i < n; ++i) X(i, j) = uni(rng);

  const double a_norm = inf_norm(A);
  Vector theta;
  for (int iter = 0; iter < 1000; ++iter) {
    Eigen::MatrixXd Y = factor.solve(M * X);
    for (Eigen::Index j = 0; j < p; ++j) Y.col(j).normalize();
    const Eigen::MatrixXd Ap = Y.transpose() * (A * Y);
    const Eigen::MatrixXd Mp = Y.transpose() * (M * Y);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> small(0.5 * (Ap + Ap.transpose()),
                                                                    0.5 * (Mp + Mp.transpose()));
    if (small.info() != Eigen::Success) throw Error(ErrorKind::Solver, "Rayleigh-Ritz projection failed");
    theta = small.eigenvalues();
    X = Y * small.eigenvectors();
    bool converged = true;
    for (int j = 0; j < k && converged; ++j) {
      const Vector r = A * X.col(j) - theta[j] * (M * X.col(j));
      converged = r.norm() <= 1e-10 * a_norm * X.col(j).norm();
    }
    if (converged) return {theta.head(k), X.leftCols(k)};
  }
  throw Error(ErrorKind::NonConvergence, "shift-invert subspace iteration did not converge");
}

}  // namespace

GeneralizedEigen smallest_eigenpairs(const SparseMatrix& A, const SparseMatrix& M, int k, EigenMethod method,
                                     double shift) {
  if (k < 1 || k > A.rows()) {
    std::ostringstream os;
    os << "requested " << k << " eigenpairs from a system with " << A.rows() << " unknowns";
    throw Error(ErrorKind::Config, os.str());
  }
  Eigen::SimplicialLLT<SparseMatrix> mass_check(M);
  if (mass_check.info() != Eigen::Success)
    throw Error(ErrorKind::Solver, "mass matrix is not positive definite");
  if (method == EigenMethod::Auto) method = A.rows() <= kDenseEigenLimit ? EigenMethod::Dense : EigenMethod::ShiftInvert;
  // subspace iteration needs a few more columns than requested
  if (method == EigenMethod::ShiftInvert && A.rows() < 2 * k + 8) method = EigenMethod::Dense;
  return method == EigenMethod::Dense ? dense_eigs(A, M, k) : shift_invert_eigs(A, M, k, shift);
}

std::vector<EigenPair> solve_eigs(const AssembledOperator& op, const SparseMatrix& M, int k, EigenMethod method) {
  if (k > static_cast<int>(op.free_count())) {
    std::ostringstream os;
    os << "k = " << k << " exceeds the free-node count " << op.free_count();
    throw Error(ErrorKind::Config, os.str());
  }
  const SparseMatrix M_free = op.restrict_matrix(M);
  GeneralizedEigen ge = smallest_eigenpairs(op.A_free, M_free, k, method);
  std::vector<EigenPair> pairs;
  pairs.reserve(k);
  for (int j = 0; j < k; ++j) {
    Vector v = ge.vectors.col(j);
    v /= std::sqrt(v.dot(M_free * v));
    Eigen::Index at;
    v.cwiseAbs().maxCoeff(&at);
    if (v[at] < 0) v = -v;
    EigenPair pair;
    pair.lambda = ge.values[j];
    pair.residual = (op.A_free * v - pair.lambda * (M_free * v)).norm();
    pair.vector = op.prolong(v);
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

int sign_changes(const AssembledOperator& op, const Vector& v) {
  const double floor = 1e-10 * v.cwiseAbs().maxCoeff();
  int count = 0;
  for (Eigen::Index c = 0; c < op.K.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(op.K, c); it; ++it) {
      const auto i = it.row(), j = it.col();
      if (i >= j || !op.is_free(static_cast<int>(i)) || !op.is_free(static_cast<int>(j))) continue;
      if ((v[i] > floor && v[j] < -floor) || (v[i] < -floor && v[j] > floor)) ++count;
    }
  return count;
}

PositivityReport check_principal_positivity(std::span<const EigenPair> pairs, const AssembledOperator& op) {
  PositivityReport report;
  if (pairs.empty()) {
    report.lines.push_back("no eigenpairs supplied");
    return report;
  }
  auto has_both_signs = [&](const Vector& v) {
    const double floor = 1e-10 * v.cwiseAbs().maxCoeff();
    bool pos = false, neg = false;
    for (int node : op.free_nodes()) {
      pos = pos || v[node] > floor;
      neg = neg || v[node] < -floor;
    }
    return pos && neg;
  };

  const Vector& principal = pairs[0].vector;
  report.principal_positive = true;
  for (int node : op.free_nodes()) report.principal_positive = report.principal_positive && principal[node] > 0;
  report.changes_sign.push_back(has_both_signs(principal));
  report.lines.push_back(std::string("xi_1 positive on free nodes: ") + (report.principal_positive ? "pass" : "fail"));

  bool others_ok = true;
  for (std::size_t j = 1; j < pairs.size(); ++j) {
    const bool flips = has_both_signs(pairs[j].vector);
    report.changes_sign.push_back(flips);
    others_ok = others_ok && flips;
    report.lines.push_back("xi_" + std::to_string(j + 1) + " changes sign: " + (flips ? "pass" : "fail"));
  }
  if (pairs.size() >= 2) {
    report.gap_testable = true;
    report.simple_principal = pairs[1].lambda - pairs[0].lambda > 0;
    report.lines.push_back(std::string("lambda_2 - lambda_1 > 0: ") + (report.simple_principal ? "pass" : "fail"));
  } else {
    report.lines.push_back("only one pair: simplicity of lambda_1 (gap lambda_2 - lambda_1 > 0) is untestable");
  }
  report.passed = report.principal_positive && others_ok && (!report.gap_testable || report.simple_principal);
  return report;
}

double coercivity_constant(std::span<const EigenPair> pairs) {
  if (pairs.empty() || !(pairs[0].lambda > 1e-12))
    throw Error(ErrorKind::Hypothesis, "lambda_1 is not positive; the form is not coercive");
  return 1.0 / pairs[0].lambda;
}

}  // namespace frd
