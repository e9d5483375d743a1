#include "frd/meshing.hpp"

#include "frd/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <set>
#include <unordered_map>

namespace frd {

namespace {

double cross(const Point& a, const Point& b, const Point& c) {
  return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

double min_angle(const Point& a, const Point& b, const Point& c) {
  auto angle = [](const Point& p, const Point& q, const Point& r) {
    const Point u = q - p, v = r - p;
    return std::atan2(std::abs(u.x() * v.y() - u.y() * v.x()), u.dot(v));
  };
  return std::min({angle(a, b, c), angle(b, c, a), angle(c, a, b)});
}

std::uint64_t edge_key(int i, int j) {
  if (i > j) std::swap(i, j);
  return (static_cast<std::uint64_t>(i) << 32) | static_cast<std::uint32_t>(j);
}

class EarClipper {
 public:
  explicit EarClipper(const std::vector<Point>& pts) : pts_(pts), n_(static_cast<int>(pts.size())) {
    prev_.resize(n_);
    next_.resize(n_);
    for (int i = 0; i < n_; ++i) {
      prev_[i] = (i + n_ - 1) % n_;
      next_[i] = (i + 1) % n_;
    }
    alive_.assign(n_, true);
    reflex_.assign(n_, false);
    quality_.assign(n_, -1.0);
    for (int i = 0; i < n_; ++i) reflex_[i] = !convex(i);
    for (int i = 0; i < n_; ++i)
      if (reflex_[i]) reflex_list_.push_back(i);
    for (int i = 0; i < n_; ++i) update_ear(i);
  }

  std::vector<std::array<int, 3>> run() {
    std::vector<std::array<int, 3>> tris;
    tris.reserve(n_ - 2);
    int remaining = n_;
    while (remaining > 3) {
      if (ears_.empty()) throw Error(ErrorKind::Geometry, "ear clipping found no ear; polygon is not simple");
      const int i = ears_.begin()->second;
      const int p = prev_[i], q = next_[i];
      tris.push_back({p, i, q});
      ears_.erase({-quality_[i], i});
      alive_[i] = false;
      next_[p] = q;
      prev_[q] = p;
      --remaining;
      for (int v : {p, q}) {
        if (reflex_[v] && convex(v)) reflex_[v] = false;
        update_ear(v);
      }
    }
    int i = ears_.empty() ? first_alive() : ears_.begin()->second;
    const double c = cross(pts_[prev_[i]], pts_[i], pts_[next_[i]]);
    if (!(c > 0)) throw Error(ErrorKind::Geometry, "ear clipping left a degenerate final triangle");
    tris.push_back({prev_[i], i, next_[i]});
    return tris;
  }

 private:
  int first_alive() const {
    for (int i = 0; i < n_; ++i)
      if (alive_[i]) return i;
    return 0;
  }

  bool convex(int i) const {
    const Point& a = pts_[prev_[i]];
    const Point& b = pts_[i];
    const Point& c = pts_[next_[i]];
    const double h2 = std::max({(b - a).squaredNorm(), (c - b).squaredNorm(), (a - c).squaredNorm()});
    return cross(a, b, c) > 1e-14 * h2;
  }

  bool is_ear(int i) const {
    if (reflex_[i] || !convex(i)) return false;
    const int ia = prev_[i], ic = next_[i];
    const Point& a = pts_[ia];
    const Point& b = pts_[i];
    const Point& c = pts_[ic];
    for (int r : reflex_list_) {
      if (!alive_[r] || !reflex_[r] || r == ia || r == i || r == ic) continue;
      const Point& p = pts_[r];
      if (p == a || p == b || p == c) continue;
      if (cross(a, b, p) >= 0 && cross(b, c, p) >= 0 && cross(c, a, p) >= 0) return false;
    }
    return true;
  }

  void update_ear(int i) {
    if (quality_[i] >= 0) ears_.erase({-quality_[i], i});
    quality_[i] = -1.0;
    if (!alive_[i] || !is_ear(i)) return;
    quality_[i] = min_angle(pts_[prev_[i]], pts_[i], pts_[next_[i]]);
    ears_.insert({-quality_[i], i});
  }

  const std::vector<Point>& pts_;
  int n_;
  std::vector<int> prev_, next_;
  std::vector<bool> alive_, reflex_;
  std::vector<int> reflex_list_;
  std::vector<double> quality_;
  std::set<std::pair<double, int>> ears_;
};

void smooth_interior(TriMesh& mesh) {
  const std::size_t n = mesh.node_count();
  std::vector<std::vector<int>> incident(n);
  for (std::size_t t = 0; t < mesh.triangle_count(); ++t)
    for (int v : mesh.triangles[t]) incident[v].push_back(static_cast<int>(t));
  std::vector<std::vector<int>> neighbors(n);
  for (const auto& e : mesh_edges(mesh)) {
    neighbors[e[0]].push_back(e[1]);
    neighbors[e[1]].push_back(e[0]);
  }
  auto local_quality = [&](int v) {
    double q = std::numeric_limits<double>::infinity();
    for (int t : incident[v]) {
      const auto& tri = mesh.triangles[t];
      const Point& a = mesh.nodes[tri[0]];
      const Point& b = mesh.nodes[tri[1]];
      const Point& c = mesh.nodes[tri[2]];
      if (!(cross(a, b, c) > 0)) return -1.0;
      q = std::min(q, min_angle(a, b, c));
    }
    return q;
  };
  for (std::size_t v = 0; v < n; ++v) {
    if (mesh.on_boundary[v] || neighbors[v].empty()) continue;
    Point avg = Point::Zero();
    for (int w : neighbors[v]) avg += mesh.nodes[w];
    avg /= static_cast<double>(neighbors[v].size());
    const Point old = mesh.nodes[v];
    const double before = local_quality(static_cast<int>(v));
    mesh.nodes[v] = avg;
    if (local_quality(static_cast<int>(v)) < before) mesh.nodes[v] = old;
  }
}

}  // namespace

double TriMesh::triangle_area(std::size_t t) const {
  const auto& tri = triangles[t];
  return 0.5 * cross(nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]);
}

double TriMesh::area() const {
  double total = 0.0;
  for (std::size_t t = 0; t < triangles.size(); ++t) total += triangle_area(t);
  return total;
}

TriMesh triangulate(const PrefractalPolygon& poly) {
  if (poly.vertices.size() < 3 || !is_simple(poly.vertices))
    throw Error(ErrorKind::Geometry, "polygon is not simple");
  if (!(poly.signed_area() > 0)) throw Error(ErrorKind::Geometry, "polygon is not counter-clockwise");

  TriMesh mesh;
  mesh.nodes = poly.vertices;
  mesh.triangles = EarClipper(poly.vertices).run();
  const int n = static_cast<int>(poly.vertices.size());
  for (int e = 0; e < n; ++e) mesh.boundary.push_back({e, (e + 1) % n, e});
  mesh.on_boundary.assign(n, true);
  return mesh;
}

TriMesh refine(const TriMesh& mesh, int levels, const RefineOptions& options) {
  if (levels < 0) throw Error(ErrorKind::Precondition, "refinement levels must be >= 0");
  TriMesh current = mesh;
  for (int level = 0; level < levels; ++level) {
    TriMesh next;
    next.nodes = current.nodes;
    next.on_boundary = current.on_boundary;
    std::unordered_map<std::uint64_t, int> midpoint;
    midpoint.reserve(current.triangle_count() * 2);
    auto mid = [&](int i, int j) {
      auto [it, inserted] = midpoint.try_emplace(edge_key(i, j), static_cast<int>(next.nodes.size()));
      if (inserted) {
        next.nodes.push_back(0.5 * (current.nodes[i] + current.nodes[j]));
        next.on_boundary.push_back(false);
      }
      return it->second;
    };
    next.triangles.reserve(current.triangle_count() * 4);
    for (const auto& t : current.triangles) {
      const int ab = mid(t[0], t[1]);
      const int bc = mid(t[1], t[2]);
      const int ca = mid(t[2], t[0]);
      next.triangles.push_back({t[0], ab, ca});
      next.triangles.push_back({ab, t[1], bc});
      next.triangles.push_back({ca, bc, t[2]});
      next.triangles.push_back({ab, bc, ca});
    }
    next.boundary.reserve(current.boundary.size() * 2);
    for (const auto& b : current.boundary) {
      const int m = midpoint.at(edge_key(b.n1, b.n2));
      next.on_boundary[m] = true;
      next.boundary.push_back({b.n1, m, b.parent});
      next.boundary.push_back({m, b.n2, b.parent});
    }
    if (options.smooth) smooth_interior(next);
    current = std::move(next);
  }
  return current;
}

std::vector<std::array<int, 2>> mesh_edges(const TriMesh& mesh) {
  std::vector<std::array<int, 2>> edges;
  edges.reserve(mesh.triangle_count() * 3);
  for (const auto& t : mesh.triangles)
    for (int k = 0; k < 3; ++k) {
      int i = t[k], j = t[(k + 1) % 3];
      if (i > j) std::swap(i, j);
      edges.push_back({i, j});
    }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

MeshStats mesh_stats(const TriMesh& mesh) {
  MeshStats s;
  s.node_count = mesh.node_count();
  s.triangle_count = mesh.triangle_count();
  s.boundary_node_count = static_cast<std::size_t>(std::count(mesh.on_boundary.begin(), mesh.on_boundary.end(), true));
  s.h_min = std::numeric_limits<double>::infinity();
  for (const auto& e : mesh_edges(mesh)) {
    const double len = (mesh.nodes[e[0]] - mesh.nodes[e[1]]).norm();
    s.h_max = std::max(s.h_max, len);
    s.h_min = std::min(s.h_min, len);
  }
  double angle = std::numbers::pi;
  for (const auto& t : mesh.triangles)
    angle = std::min(angle, min_angle(mesh.nodes[t[0]], mesh.nodes[t[1]], mesh.nodes[t[2]]));
  s.min_angle_deg = angle * 180.0 / std::numbers::pi;
  return s;
}

bool is_conforming(const TriMesh& mesh) {
  std::map<std::pair<int, int>, int> directed;
  for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
    if (!(mesh.triangle_area(t) > 0)) return false;
    const auto& tri = mesh.triangles[t];
    for (int k = 0; k < 3; ++k) ++directed[{tri[k], tri[(k + 1) % 3]}];
  }
  std::set<std::pair<int, int>> boundary_set;
  for (const auto& b : mesh.boundary) boundary_set.insert({b.n1, b.n2});
  for (const auto& [edge, count] : directed) {
    if (count != 1) return false;
    const bool has_twin = directed.count({edge.second, edge.first}) > 0;
    const bool is_boundary = boundary_set.count(edge) > 0;
    if (has_twin == is_boundary) return false;
  }
  if (boundary_set.size() != mesh.boundary.size()) return false;
  const std::size_t nb = mesh.boundary.size();
  for (std::size_t b = 0; b < nb; ++b)
    if (mesh.boundary[b].n2 != mesh.boundary[(b + 1) % nb].n1) return false;
  return true;
}

MeshMeasure transfer_measure(const TriMesh& mesh, const BoundaryMeasure& measure) {
  const std::size_t parents = measure.weights.size();
  std::vector<double> parent_length(parents, 0.0);
  for (std::size_t b = 0; b < mesh.boundary.size(); ++b) {
    const int p = mesh.boundary[b].parent;
    if (p < 0 || static_cast<std::size_t>(p) >= parents)
      throw Error(ErrorKind::Consistency, "mesh boundary edge refers to a polygon edge the measure does not cover");
    parent_length[p] += mesh.boundary_edge_length(b);
  }
  for (std::size_t p = 0; p < parents; ++p)
    if (!(parent_length[p] > 0))
      throw Error(ErrorKind::Consistency, "polygon edge " + std::to_string(p) + " has no mesh boundary edge");

  MeshMeasure out;
  out.kind = measure.kind;
  out.edge_weight.resize(mesh.boundary.size());
  out.node_dirichlet.assign(mesh.node_count(), false);
  for (std::size_t b = 0; b < mesh.boundary.size(); ++b) {
    const auto& e = mesh.boundary[b];
    out.edge_weight[b] = measure.weights[e.parent] * mesh.boundary_edge_length(b) / parent_length[e.parent];
    out.total_mass += out.edge_weight[b];
    if (measure.edge_infinite[e.parent]) {
      out.node_dirichlet[e.n1] = true;
      out.node_dirichlet[e.n2] = true;
    }
  }
  return out;
}

}  // namespace frd
