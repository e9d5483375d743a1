#include "doctest.h"

#include "frd/error.hpp"
#include "frd/meshing.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <set>

using namespace frd;

namespace {

std::vector<PrefractalPolygon> families() {
  return {build_square(1.0), build_koch(2, 1.0), build_tree({}, 3), build_cusp(0.5, 1.0, 1.0, 10)};
}

}  // namespace

TEST_CASE("ear clipping baselines") {
  const auto sq = triangulate(build_square(1.0));
  CHECK(sq.triangle_count() == 2);
  CHECK(sq.node_count() == 4);
  CHECK(triangulate(build_koch(0, 1.0)).triangle_count() == 1);
  CHECK(triangulate(build_koch(1, 1.0)).triangle_count() == 10);
  for (const auto& p : families()) CHECK(triangulate(p).triangle_count() == p.edge_count() - 2);
}

TEST_CASE("non-simple polygon is a geometry error") {
  PrefractalPolygon bowtie = build_square(1.0);
  bowtie.vertices = {{0, 0}, {1, 1}, {1, 0}, {0, 1}};
  try {
    triangulate(bowtie);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Geometry);
  }
}

TEST_CASE("red refinement counts") {
  const auto sq = triangulate(build_square(1.0));
  const auto r1 = refine(sq, 1);
  CHECK(r1.triangle_count() == 8);
  CHECK(r1.node_count() == 9);
  CHECK(refine(sq, 3).triangle_count() == 128);
  for (const auto& p : families()) {
    const auto m0 = triangulate(p);
    CHECK(refine(m0, 2).triangle_count() == 16 * m0.triangle_count());
  }
}

TEST_CASE("mesh statistics") {
  const auto sq = triangulate(build_square(1.0));
  CHECK(mesh_stats(sq).h_max == doctest::Approx(std::sqrt(2.0)));
  CHECK(mesh_stats(refine(sq, 1)).h_max == doctest::Approx(std::sqrt(2.0) / 2));
  CHECK(mesh_stats(triangulate(build_koch(0, 1.0))).min_angle_deg == doctest::Approx(60.0));
  const auto st = mesh_stats(refine(sq, 2));
  CHECK(st.boundary_node_count == 16);
  CHECK(st.node_count == 25);
}

TEST_CASE("minimum angle is invariant under unsmoothed red refinement") {
  for (const auto& p : families()) {
    const auto m0 = triangulate(p);
    const double a0 = mesh_stats(m0).min_angle_deg;
    const auto m2 = refine(m0, 2, RefineOptions{false});
    CHECK(mesh_stats(m2).min_angle_deg == doctest::Approx(a0).epsilon(1e-9));
  }
}

TEST_CASE("smoothing never lowers the minimum angle") {
  for (const auto& p : families()) {
    const auto m0 = triangulate(p);
    CHECK(mesh_stats(refine(m0, 2, RefineOptions{true})).min_angle_deg >=
          mesh_stats(refine(m0, 2, RefineOptions{false})).min_angle_deg - 1e-9);
  }
}

TEST_CASE("mesh invariants on every family and level") {
  for (const auto& p : families()) {
    for (int level = 0; level <= 2; ++level) {
      CAPTURE(level);
      const TriMesh m = level == 0 ? triangulate(p) : refine(triangulate(p), level);
      CHECK(is_conforming(m));
      for (std::size_t t = 0; t < m.triangle_count(); ++t) CHECK(m.triangle_area(t) > 0);
      CHECK(m.area() == doctest::Approx(p.signed_area()).epsilon(1e-10));

      // Euler relation for a simply connected polygon.
      const auto edges = mesh_edges(m);
      const long v = static_cast<long>(m.node_count()), e = static_cast<long>(edges.size()),
                 t = static_cast<long>(m.triangle_count());
      CHECK(v - e + t == 1);

      // Interior edges are shared by two triangles, boundary edges by one.
      std::map<std::pair<int, int>, int> uses;
      for (const auto& tri : m.triangles)
        for (int k = 0; k < 3; ++k) {
          const int a = tri[k], b = tri[(k + 1) % 3];
          ++uses[{std::min(a, b), std::max(a, b)}];
        }
      std::set<std::pair<int, int>> bset;
      for (const auto& be : m.boundary) bset.insert({std::min(be.n1, be.n2), std::max(be.n1, be.n2)});
      for (const auto& [edge, count] : uses) CHECK(count == (bset.count(edge) ? 1 : 2));

      // Boundary cycle runs through the polygon vertices in order.
      for (std::size_t b = 0; b < m.boundary.size(); ++b)
        CHECK(m.boundary[b].n2 == m.boundary[(b + 1) % m.boundary.size()].n1);
      std::vector<int> corners;
      for (const auto& be : m.boundary)
        for (std::size_t k = 0; k < p.edge_count(); ++k)
          if ((m.nodes[be.n1] - p.vertices[k]).norm() < 1e-12) corners.push_back(static_cast<int>(k));
      REQUIRE(corners.size() == p.edge_count());
      for (std::size_t k = 0; k < corners.size(); ++k)
        CHECK(corners[(k + 1) % corners.size()] == static_cast<int>((corners[k] + 1) % p.edge_count()));

      // Parentage: each boundary edge lies on its parent polygon edge.
      for (const auto& be : m.boundary) {
        const Point a = p.edge_start(be.parent), d = p.edge_end(be.parent) - a;
        for (int node : {be.n1, be.n2}) {
          const Point r = m.nodes[node] - a;
          CHECK(std::abs(d.x() * r.y() - d.y() * r.x()) <= 1e-12 * d.squaredNorm());
        }
      }
    }
  }
}

TEST_CASE("refinement is deterministic") {
  const auto a = refine(triangulate(build_koch(2, 1.0)), 2);
  const auto b = refine(triangulate(build_koch(2, 1.0)), 2);
  REQUIRE(a.node_count() == b.node_count());
  for (std::size_t i = 0; i < a.node_count(); ++i) CHECK(a.nodes[i] == b.nodes[i]);
  CHECK(a.triangles == b.triangles);
}

TEST_CASE("boundary measure transfer") {
  for (const auto& p : families())
    for (auto kind : {MeasureKind::Sigma, MeasureKind::Hausdorff, MeasureKind::SigmaFractalDirichlet}) {
      const auto bm = attach_measure(p, kind);
      const auto mesh = refine(triangulate(p), 2);
      const auto mm = transfer_measure(mesh, bm);
      double total = 0;
      for (double w : mm.edge_weight) total += w;
      CHECK(total == doctest::Approx(bm.total_mass).epsilon(1e-12));
      for (std::size_t b = 0; b < mesh.boundary.size(); ++b) {
        const int parent = mesh.boundary[b].parent;
        const double share = mesh.boundary_edge_length(b) / p.edge_length(parent);
        CHECK(mm.edge_weight[b] == doctest::Approx(share * bm.weights[parent]).epsilon(1e-12));
      }
      // Dirichlet flags: polygon corners keep theirs, interior nodes are never flagged.
      for (std::size_t i = 0; i < mesh.node_count(); ++i)
        if (!mesh.on_boundary[i]) CHECK_FALSE(mm.node_dirichlet[i]);
    }
}
