#pragma once

// Domain -> measure -> mesh -> assembled operator, in one call.

#include "frd/assembly.hpp"

namespace frd {

struct DomainSpec {
  DomainFamily family = DomainFamily::Square;
  int generation = 2;
  double side = 1.0;
  int koch_cap = kDefaultKochCap;
  TreeParams tree;
  double cusp_gamma = 0.5;
  double cusp_length = 1.0;
  double cusp_l = 1.0;
  int cusp_segments = 16;
};

DomainFamily parse_domain_family(std::string_view name);
PrefractalPolygon build_domain(const DomainSpec& spec);

struct ProblemSpec {
  DomainSpec domain;
  int refine = 2;
  bool smooth = true;
  MeasureKind measure = MeasureKind::Sigma;
  MeasureOptions measure_options;
  double s = 0.5;
  double eta = 0.5;
  bool nonlocal = true;
  bool lumped_mass = false;
  bool lumped_boundary = false;
};

struct Problem {
  PrefractalPolygon poly;
  BoundaryMeasure measure;
  TriMesh mesh;
  MeshMeasure mesh_measure;
  AssembledOperator op;

  const SparseMatrix& M() const { return op.M; }
};

Problem build_problem(const ProblemSpec& spec);

/// Everything up to the mesh and its measure, without assembling.
Problem build_mesh_only(const ProblemSpec& spec);

}  // namespace frd
