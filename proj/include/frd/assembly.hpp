#pragma once

// Discrete counterparts of the form
//   a(u, v) = int grad u . grad v + int u v dmu
//           + iint K_s(x, y) (u(x) - u(y)) (v(x) - v(y)) dmu_x dmu_y
// on piecewise-linear functions.

#include "frd/meshing.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <functional>
#include <vector>

namespace frd {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// Nodal values aligned with TriMesh nodes.
using FemFunction = Vector;

SparseMatrix assemble_stiffness(const TriMesh& mesh);
SparseMatrix assemble_mass(const TriMesh& mesh, bool lumped = false);

/// (w_e / 6) [[2, 1], [1, 2]] per boundary edge, or (w_e / 2) I when lumped.
SparseMatrix assemble_boundary_mass(const TriMesh& mesh, const MeshMeasure& measure, bool lumped = false);

/// Radial interaction kernel k(|x - y|).
using RadialKernel = std::function<double(double)>;

/// |x - y|^-(N - 1 + 2s) with N = 2.
RadialKernel power_kernel(double s);

struct NonlocalOptions {
  double s = 0.5;
  /// Pairs closer than eta times the shortest incident edge are dropped.
  double eta = 0.5;
  /// Empty means power_kernel(s).
  RadialKernel kernel;
};

/// Node-collocation quadrature of the boundary double integral:
/// sum_{i<j} 2 m_i m_j k(|x_i - x_j|) (e_i - e_j)(e_i - e_j)^T with m_i half
/// the measure of the edges incident to boundary node i.
SparseMatrix assemble_nonlocal(const TriMesh& mesh, const MeshMeasure& measure, const NonlocalOptions& options);

/// The assembled operator A = K + B_mu + N_s together with the Dirichlet
/// elimination bookkeeping. Reduced quantities live on free nodes only.
class AssembledOperator {
 public:
  SparseMatrix K, M, B_mu, N_s;
  SparseMatrix A;       // full, before elimination
  SparseMatrix A_free;  // rows/cols of free nodes
  double s = 0.5;

  std::size_t node_count() const { return node_to_free_.size(); }
  std::size_t free_count() const { return free_nodes_.size(); }
  const std::vector<int>& free_nodes() const { return free_nodes_; }
  const std::vector<int>& dirichlet_nodes() const { return dirichlet_nodes_; }
  bool is_free(int node) const { return node_to_free_[node] >= 0; }

  Vector restrict_vector(const Vector& full) const;
  /// Dirichlet entries of the result are zero.
  Vector prolong(const Vector& reduced) const;
  SparseMatrix restrict_matrix(const SparseMatrix& full) const;

  /// a(u, v) on full nodal vectors.
  double form(const Vector& u, const Vector& v) const { return u.dot(A * v); }

 private:
  friend AssembledOperator compose(SparseMatrix, SparseMatrix, SparseMatrix, SparseMatrix,
                                   const std::vector<bool>&, double);
  std::vector<int> free_nodes_;
  std::vector<int> dirichlet_nodes_;
  std::vector<int> node_to_free_;
  SparseMatrix selector_;  // free x all
};

/// Builds A and checks the discrete nontriviality hypothesis: the measure
/// must carry mass or some node must be Dirichlet.
AssembledOperator compose(SparseMatrix K, SparseMatrix M, SparseMatrix B_mu, SparseMatrix N_s,
                          const std::vector<bool>& dirichlet, double s);

/// Row sums of a mass matrix.
Vector lumped_weights(const SparseMatrix& M);

/// ||u||_{L^4} / (||grad u||^2 + ||u||^2_{L^2(dOmega, sigma)})^{1/2}, with the
/// L^4 norm from the edge-midpoint rule per triangle.
class MazyaRatio {
 public:
  MazyaRatio(const TriMesh& mesh, const MeshMeasure& sigma);
  double operator()(const Vector& u) const;

 private:
  const TriMesh* mesh_;
  SparseMatrix K_, B_;
};

double mazya_ratio(const TriMesh& mesh, const MeshMeasure& sigma, const Vector& u);

/// Symmetry, semidefiniteness and constant-annihilation checks on every block.
struct MatrixInvariantReport {
  double symmetry_defect = 0;    // max |X - X^T| over all matrices
  double min_psd_margin = 0;     // min x^T X x / (|x|^2 |X|) over PSD checks
  double mass_pd_margin = 0;     // min x^T M x / (|x|^2 |M|)
  double nonlocal_constant = 0;  // |N_s 1|_inf / |N_s|
  double stiffness_constant = 0; // |K 1|_inf / |K|
  double reduced_pd_margin = 0;  // lambda_min estimate of A_free relative to |A|
  bool passed = false;
};

MatrixInvariantReport check_matrix_invariants(const AssembledOperator& op, unsigned seed, int samples = 20);

}  // namespace frd
