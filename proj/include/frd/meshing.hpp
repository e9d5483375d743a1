#pragma once

#include "frd/geometry.hpp"

#include <array>
#include <vector>

namespace frd {

struct BoundaryEdge {
  int n1 = 0;
  int n2 = 0;
  int parent = 0;  // polygon edge this mesh edge lies on
};

/// Conforming P1 triangulation. Boundary edges are stored in the cyclic
/// order of the polygon, each oriented CCW.
struct TriMesh {
  std::vector<Point> nodes;
  std::vector<std::array<int, 3>> triangles;
  std::vector<BoundaryEdge> boundary;
  std::vector<bool> on_boundary;

  std::size_t node_count() const { return nodes.size(); }
  std::size_t triangle_count() const { return triangles.size(); }
  double triangle_area(std::size_t t) const;
  double area() const;
  double boundary_edge_length(std::size_t b) const {
    return (nodes[boundary[b].n2] - nodes[boundary[b].n1]).norm();
  }
};

/// Ear clipping of a simple CCW polygon; preferring the best-shaped ear.
TriMesh triangulate(const PrefractalPolygon& poly);

struct RefineOptions {
  /// One guarded Laplacian pass over interior nodes after each level.
  bool smooth = true;
};

/// Red refinement: every triangle splits into four at edge midpoints.
TriMesh refine(const TriMesh& mesh, int levels, const RefineOptions& options = {});

struct MeshStats {
  double h_max = 0;
  double h_min = 0;
  double min_angle_deg = 0;
  std::size_t node_count = 0;
  std::size_t triangle_count = 0;
  std::size_t boundary_node_count = 0;
};

MeshStats mesh_stats(const TriMesh& mesh);

/// Unique undirected edges (i < j), lexicographically sorted.
std::vector<std::array<int, 2>> mesh_edges(const TriMesh& mesh);

/// Positive areas, edge conformity and a closed boundary cycle.
bool is_conforming(const TriMesh& mesh);

/// The boundary measure carried onto mesh boundary edges. A child edge gets
/// the share of its parent's weight proportional to its length.
struct MeshMeasure {
  MeasureKind kind = MeasureKind::Sigma;
  std::vector<double> edge_weight;   // per mesh boundary edge
  std::vector<bool> node_dirichlet;  // per mesh node
  double total_mass = 0;
};

MeshMeasure transfer_measure(const TriMesh& mesh, const BoundaryMeasure& measure);

}  // namespace frd
