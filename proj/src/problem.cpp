#include "frd/problem.hpp"

#include "frd/error.hpp"

#include <string>

namespace frd {

DomainFamily parse_domain_family(std::string_view name) {
  for (DomainFamily f : {DomainFamily::Square, DomainFamily::Koch, DomainFamily::Tree, DomainFamily::Cusp})
    if (to_string(f) == name) return f;
  throw Error(ErrorKind::Config, "unknown domain family '" + std::string(name) + "'");
}

PrefractalPolygon build_domain(const DomainSpec& spec) {
  switch (spec.family) {
    case DomainFamily::Square: return build_square(spec.side);
    case DomainFamily::Koch: return build_koch(spec.generation, spec.side, spec.koch_cap);
    case DomainFamily::Tree: {
      PrefractalPolygon p = build_tree(spec.tree, spec.generation);
      return spec.side == 1.0 ? p : scaled(p, spec.side);
    }
    case DomainFamily::Cusp: return build_cusp(spec.cusp_gamma, spec.cusp_length, spec.cusp_l, spec.cusp_segments);
  }
  throw Error(ErrorKind::Config, "unhandled domain family");
}

Problem build_mesh_only(const ProblemSpec& spec) {
  if (spec.refine < 0) throw Error(ErrorKind::Precondition, "refine levels must be >= 0");
  Problem p;
  p.poly = build_domain(spec.domain);
  p.measure = attach_measure(p.poly, spec.measure, spec.measure_options);
  TriMesh coarse = triangulate(p.poly);
  p.mesh = spec.refine > 0 ? refine(coarse, spec.refine, RefineOptions{spec.smooth}) : std::move(coarse);
  p.mesh_measure = transfer_measure(p.mesh, p.measure);
  return p;
}

Problem build_problem(const ProblemSpec& spec) {
  Problem p = build_mesh_only(spec);
  SparseMatrix K = assemble_stiffness(p.mesh);
  SparseMatrix M = assemble_mass(p.mesh, spec.lumped_mass);
  SparseMatrix B = assemble_boundary_mass(p.mesh, p.mesh_measure, spec.lumped_boundary);
  SparseMatrix N(K.rows(), K.cols());
  if (spec.nonlocal && p.mesh_measure.total_mass > 0)
    N = assemble_nonlocal(p.mesh, p.mesh_measure, NonlocalOptions{spec.s, spec.eta, {}});
  else if (!(spec.s > 0 && spec.s < 1))
    throw Error(ErrorKind::Config, "s must lie in (0, 1)");
  p.op = compose(std::move(K), std::move(M), std::move(B), std::move(N), p.mesh_measure.node_dirichlet, spec.s);
  return p;
}

}  // namespace frd
