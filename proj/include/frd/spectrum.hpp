#pragma once

#include "frd/assembly.hpp"

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

namespace frd {

struct EigenPair {
  double lambda = 0;
  FemFunction vector;  // full nodal vector, x^T M x = 1, zero on Dirichlet nodes
  double residual = 0; // ||A x - lambda M x|| on free nodes
};

enum class EigenMethod {
  Auto,         ///< dense up to kDenseEigenLimit free nodes, shift-invert beyond
  Dense,
  ShiftInvert,  ///< block inverse iteration with Rayleigh-Ritz
};

inline constexpr Eigen::Index kDenseEigenLimit = 1500;

struct GeneralizedEigen {
  Vector values;
  Eigen::MatrixXd vectors;  // columns M-orthonormal
};

/// k smallest eigenpairs of A x = lambda M x for symmetric A and SPD M.
/// The shift-invert path factors A - shift M, which must be nonsingular.
GeneralizedEigen smallest_eigenpairs(const SparseMatrix& A, const SparseMatrix& M, int k,
                                     EigenMethod method = EigenMethod::Auto, double shift = 0.0);

/// k smallest eigenpairs of the reduced operator; vectors are normalized in
/// the M inner product with their largest-magnitude entry positive.
std::vector<EigenPair> solve_eigs(const AssembledOperator& op, const SparseMatrix& M, int k,
                                  EigenMethod method = EigenMethod::Auto);

/// Mesh edges between free nodes across which the vector changes sign.
int sign_changes(const AssembledOperator& op, const Vector& v);

struct PositivityReport {
  bool principal_positive = false;
  bool simple_principal = false;       // lambda_2 - lambda_1 > 0; false when untestable
  bool gap_testable = false;
  std::vector<bool> changes_sign;      // per pair; entry 0 is for the principal vector
  std::vector<std::string> lines;
  bool passed = false;
};

PositivityReport check_principal_positivity(std::span<const EigenPair> pairs, const AssembledOperator& op);

/// Optimal C in ||u||^2_M <= C a(u, u), i.e. 1 / lambda_1.
double coercivity_constant(std::span<const EigenPair> pairs);

}  // namespace frd
