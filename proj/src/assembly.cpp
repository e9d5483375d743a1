#include "frd/assembly.hpp"

#include "frd/error.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace frd {

namespace {

using Triplet = Eigen::Triplet<double>;

SparseMatrix from_triplets(std::size_t n, const std::vector<Triplet>& triplets) {
  SparseMatrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  return m;
}

// Adds value at (i, j) and (j, i) so both entries see identical summands.
void add_symmetric(std::vector<Triplet>& t, int i, int j, double value) {
  t.emplace_back(i, j, value);
  if (i != j) t.emplace_back(j, i, value);
}

double inf_norm(const SparseMatrix& m) {
  Vector rows = Vector::Zero(m.rows());
  for (Eigen::Index k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) rows[it.row()] += std::abs(it.value());
  return rows.size() ? rows.maxCoeff() : 0.0;
}

}  // namespace

SparseMatrix assemble_stiffness(const TriMesh& mesh) {
  std::vector<Triplet> t;
  t.reserve(mesh.triangle_count() * 9);
  for (std::size_t e = 0; e < mesh.triangle_count(); ++e) {
    const auto& tri = mesh.triangles[e];
    const double area = mesh.triangle_area(e);
    if (!(area > 0) || !std::isfinite(area)) {
      std::ostringstream os;
      os << "degenerate triangle " << e << " (area " << area << ")";
      throw Error(ErrorKind::Assembly, os.str());
    }
    // edge opposite vertex k
    Point opp[3];
    for (int k = 0; k < 3; ++k) opp[k] = mesh.nodes[tri[(k + 2) % 3]] - mesh.nodes[tri[(k + 1) % 3]];
    for (int a = 0; a < 3; ++a)
      for (int b = a; b < 3; ++b) add_symmetric(t, tri[a], tri[b], opp[a].dot(opp[b]) / (4.0 * area));
  }
  return from_triplets(mesh.node_count(), t);
}

SparseMatrix assemble_mass(const TriMesh& mesh, bool lumped) {
  std::vector<Triplet> t;
  t.reserve(mesh.triangle_count() * (lumped ? 3 : 9));
  for (std::size_t e = 0; e < mesh.triangle_count(); ++e) {
    const auto& tri = mesh.triangles[e];
    const double area = mesh.triangle_area(e);
    for (int a = 0; a < 3; ++a) {
      if (lumped) {
        t.emplace_back(tri[a], tri[a], area / 3.0);
        continue;
      }
      for (int b = a; b < 3; ++b) add_symmetric(t, tri[a], tri[b], area / 12.0 * (a == b ? 2.0 : 1.0));
    }
  }
  return from_triplets(mesh.node_count(), t);
}

SparseMatrix assemble_boundary_mass(const TriMesh& mesh, const MeshMeasure& measure, bool lumped) {
  if (measure.edge_weight.size() != mesh.boundary.size())
    throw Error(ErrorKind::Consistency, "measure has " + std::to_string(measure.edge_weight.size()) +
                                            " edge weights for " + std::to_string(mesh.boundary.size()) +
                                            " mesh boundary edges");
  std::vector<Triplet> t;
  for (std::size_t b = 0; b < mesh.boundary.size(); ++b) {
    const double w = measure.edge_weight[b];
    if (w == 0.0) continue;
    const int i = mesh.boundary[b].n1, j = mesh.boundary[b].n2;
    if (lumped) {
      t.emplace_back(i, i, w / 2.0);
      t.emplace_back(j, j, w / 2.0);
    } else {
      t.emplace_back(i, i, w / 3.0);
      t.emplace_back(j, j, w / 3.0);
      add_symmetric(t, i, j, w / 6.0);
    }
  }
  return from_triplets(mesh.node_count(), t);
}

RadialKernel power_kernel(double s) {
  const double exponent = -(1.0 + 2.0 * s);
  return [exponent](double r) { return std::pow(r, exponent); };
}

SparseMatrix assemble_nonlocal(const TriMesh& mesh, const MeshMeasure& measure, const NonlocalOptions& options) {
  if (!(options.s > 0 && options.s < 1)) throw Error(ErrorKind::Config, "nonlocal exponent s must lie in (0, 1)");
  if (!(options.eta >= 0)) throw Error(ErrorKind::Config, "nonlocal cutoff eta must be >= 0");
  if (measure.edge_weight.size() != mesh.boundary.size())
    throw Error(ErrorKind::Consistency, "measure does not match the mesh boundary");
  const RadialKernel kernel = options.kernel ? options.kernel : power_kernel(options.s);

  // boundary edges form one cycle: edge b ends where edge b+1 starts
  const std::size_t nb = mesh.boundary.size();
  std::vector<int> node(nb);
  std::vector<double> mass(nb), shortest(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    const std::size_t prev = (b + nb - 1) % nb;
    node[b] = mesh.boundary[b].n1;
    mass[b] = 0.5 * (measure.edge_weight[prev] + measure.edge_weight[b]);
    shortest[b] = std::min(mesh.boundary_edge_length(prev), mesh.boundary_edge_length(b));
  }

  std::vector<Triplet> t;
  for (std::size_t i = 0; i < nb; ++i) {
    if (mass[i] == 0.0) continue;
    for (std::size_t j = i + 1; j < nb; ++j) {
      if (mass[j] == 0.0) continue;
      const double r = (mesh.nodes[node[i]] - mesh.nodes[node[j]]).norm();
      if (r == 0.0)
        throw Error(ErrorKind::Geometry, "boundary nodes " + std::to_string(node[i]) + " and " +
                                             std::to_string(node[j]) + " coincide");
      if (r < options.eta * std::min(shortest[i], shortest[j])) continue;
      const double w = 2.0 * mass[i] * mass[j] * kernel(r);
      t.emplace_back(node[i], node[i], w);
      t.emplace_back(node[j], node[j], w);
      add_symmetric(t, node[i], node[j], -w);
    }
  }
  return from_triplets(mesh.node_count(), t);
}

Vector AssembledOperator::restrict_vector(const Vector& full) const { return selector_ * full; }

Vector AssembledOperator::prolong(const Vector& reduced) const { return selector_.transpose() * reduced; }

SparseMatrix AssembledOperator::restrict_matrix(const SparseMatrix& full) const {
  SparseMatrix r = selector_ * full * SparseMatrix(selector_.transpose());
  r.makeCompressed();
  return r;
}

AssembledOperator compose(SparseMatrix K, SparseMatrix M, SparseMatrix B_mu, SparseMatrix N_s,
                          const std::vector<bool>& dirichlet, double s) {
  const Eigen::Index n = K.rows();
  for (const SparseMatrix* m : {&K, &M, &B_mu, &N_s})
    if (m->rows() != n || m->cols() != n) throw Error(ErrorKind::Consistency, "operator blocks differ in size");
  if (static_cast<Eigen::Index>(dirichlet.size()) != n)
    throw Error(ErrorKind::Consistency, "Dirichlet flags do not match the node count");

  AssembledOperator op;
  op.s = s;
  op.node_to_free_.assign(n, -1);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (dirichlet[i]) {
      op.dirichlet_nodes_.push_back(static_cast<int>(i));
    } else {
      op.node_to_free_[i] = static_cast<int>(op.free_nodes_.size());
      op.free_nodes_.push_back(static_cast<int>(i));
    }
  }
  const double boundary_mass = B_mu.sum();
  if (!(boundary_mass > 0) && op.dirichlet_nodes_.empty())
    throw Error(ErrorKind::Hypothesis,
                "(H_mu) violated: the boundary measure is zero and no node is Dirichlet; "
                "the zero measure is not admissible");
  if (op.free_nodes_.empty()) throw Error(ErrorKind::Hypothesis, "every node is Dirichlet; nothing to solve");

  std::vector<Eigen::Triplet<double>> sel;
  for (std::size_t k = 0; k < op.free_nodes_.size(); ++k)
    sel.emplace_back(static_cast<int>(k), op.free_nodes_[k], 1.0);
  op.selector_.resize(static_cast<Eigen::Index>(op.free_nodes_.size()), n);
  op.selector_.setFromTriplets(sel.begin(), sel.end());

  op.A = K + B_mu + N_s;
  op.A.makeCompressed();
  op.K = std::move(K);
  op.M = std::move(M);
  op.B_mu = std::move(B_mu);
  op.N_s = std::move(N_s);
  op.A_free = op.restrict_matrix(op.A);
  return op;
}

Vector lumped_weights(const SparseMatrix& M) {
  Vector w = Vector::Zero(M.rows());
  for (Eigen::Index k = 0; k < M.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(M, k); it; ++it) w[it.row()] += it.value();
  return w;
}

MazyaRatio::MazyaRatio(const TriMesh& mesh, const MeshMeasure& sigma)
    : mesh_(&mesh), K_(assemble_stiffness(mesh)), B_(assemble_boundary_mass(mesh, sigma)) {}

double MazyaRatio::operator()(const Vector& u) const {
  if (u.size() != static_cast<Eigen::Index>(mesh_->node_count()))
    throw Error(ErrorKind::Consistency, "function does not match the mesh");
  double l4 = 0.0;
  for (std::size_t t = 0; t < mesh_->triangle_count(); ++t) {
    const auto& tri = mesh_->triangles[t];
    double sum = 0.0;
    for (int k = 0; k < 3; ++k) {
      const double mid = 0.5 * (u[tri[k]] + u[tri[(k + 1) % 3]]);
      sum += std::pow(mid, 4);
    }
    l4 += mesh_->triangle_area(t) / 3.0 * sum;
  }
  const double denominator = u.dot(K_ * u) + u.dot(B_ * u);
  if (!(denominator > 0)) throw Error(ErrorKind::DegenerateInput, "Maz'ya ratio denominator vanishes");
  return std::pow(l4, 0.25) / std::sqrt(denominator);
}

double mazya_ratio(const TriMesh& mesh, const MeshMeasure& sigma, const Vector& u) {
  return MazyaRatio(mesh, sigma)(u);
}

MatrixInvariantReport check_matrix_invariants(const AssembledOperator& op, unsigned seed, int samples) {
  MatrixInvariantReport r;
  const SparseMatrix* all[] = {&op.K, &op.M, &op.B_mu, &op.N_s, &op.A};
  for (const SparseMatrix* m : all) {
    const SparseMatrix diff = SparseMatrix(m->transpose()) - *m;
    for (Eigen::Index k = 0; k < diff.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(diff, k); it; ++it)
        r.symmetry_defect = std::max(r.symmetry_defect, std::abs(it.value()));
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const Eigen::Index n = op.K.rows();
  r.min_psd_margin = std::numeric_limits<double>::infinity();
  r.mass_pd_margin = std::numeric_limits<double>::infinity();
  for (int k = 0; k < samples; ++k) {
    Vector x(n);
    for (Eigen::Index i = 0; i < n; ++i) x[i] = normal(rng);
    for (const SparseMatrix* m : {&op.K, &op.B_mu, &op.N_s}) {
      const double norm = inf_norm(*m);
      if (norm == 0.0) continue;
      r.min_psd_margin = std::min(r.min_psd_margin, x.dot(*m * x) / (x.squaredNorm() * norm));
    }
    r.mass_pd_margin = std::min(r.mass_pd_margin, x.dot(op.M * x) / (x.squaredNorm() * inf_norm(op.M)));
  }
  if (!std::isfinite(r.min_psd_margin)) r.min_psd_margin = 0.0;

  const Vector ones = Vector::Ones(n);
  const double nn = inf_norm(op.N_s);
  r.nonlocal_constant = nn > 0 ? (op.N_s * ones).cwiseAbs().maxCoeff() / nn : 0.0;
  r.stiffness_constant = (op.K * ones).cwiseAbs().maxCoeff() / inf_norm(op.K);

  // inverse iteration on A_free; a failed Cholesky means not positive definite
  Eigen::SimplicialLLT<SparseMatrix> llt(op.A_free);
  if (llt.info() == Eigen::Success) {
    Vector v = Vector::Ones(op.A_free.rows());
    double lambda = 0.0;
    for (int it = 0; it < 50; ++it) {
      v.normalize();
      Vector w = llt.solve(v);
      lambda = 1.0 / v.dot(w);
      v = w;
    }
    r.reduced_pd_margin = lambda / inf_norm(op.A_free);
  } else {
    r.reduced_pd_margin = -1.0;
  }

  r.passed = r.symmetry_defect == 0.0 && r.min_psd_margin >= -1e-12 && r.mass_pd_margin > 0 &&
             r.nonlocal_constant <= 1e-12 && r.stiffness_constant <= 1e-12 && r.reduced_pd_margin > 0;
  return r;
}

}  // namespace frd
