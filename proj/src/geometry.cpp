#include "frd/geometry.hpp"

#include "frd/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

namespace frd {

Similitude::Similitude(double scale, double angle, bool reflect, Point translation)
    : scale_(scale), angle_(angle), reflect_(reflect), translation_(std::move(translation)) {}

Point Similitude::operator()(const Point& p) const {
  const double c = std::cos(angle_), s = std::sin(angle_);
  const double x = p.x();
  const double y = reflect_ ? -p.y() : p.y();
  return translation_ + scale_ * Point(c * x - s * y, s * x + c * y);
}

Similitude Similitude::compose(const Similitude& inner) const {
  // R(a) J R(b) = R(a - b) J, so the angle of an inner rotation flips sign
  // when the outer map reflects.
  const double angle = reflect_ ? angle_ - inner.angle_ : angle_ + inner.angle_;
  return Similitude(scale_ * inner.scale_, angle, reflect_ != inner.reflect_,
                    (*this)(inner.translation_));
}

std::string_view to_string(DomainFamily family) {
  switch (family) {
    case DomainFamily::Square: return "square";
    case DomainFamily::Koch: return "koch";
    case DomainFamily::Tree: return "tree";
    case DomainFamily::Cusp: return "cusp";
  }
  return "?";
}

std::string_view to_string(EdgeTag tag) { return tag == EdgeTag::Fractal ? "fractal" : "smooth"; }

double signed_area(std::span<const Point> ring) {
  double twice = 0.0;
  const std::size_t n = ring.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point& p = ring[i];
    const Point& q = ring[(i + 1) % n];
    twice += p.x() * q.y() - q.x() * p.y();
  }
  return 0.5 * twice;
}

double PrefractalPolygon::perimeter() const {
  double total = 0.0;
  for (std::size_t e = 0; e < edge_count(); ++e) total += edge_length(e);
  return total;
}

double PrefractalPolygon::signed_area() const { return frd::signed_area(vertices); }

int PrefractalPolygon::piece_count() const {
  int highest = -1;
  for (int p : piece) highest = std::max(highest, p);
  return highest + 1;
}

namespace {

double orient(const Point& a, const Point& b, const Point& c) {
  return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

bool within_box(const Point& a, const Point& b, const Point& p) {
  return std::min(a.x(), b.x()) <= p.x() && p.x() <= std::max(a.x(), b.x()) &&
         std::min(a.y(), b.y()) <= p.y() && p.y() <= std::max(a.y(), b.y());
}

bool segments_touch(const Point& p1, const Point& p2, const Point& q1, const Point& q2) {
  const double d1 = orient(q1, q2, p1);
  const double d2 = orient(q1, q2, p2);
  const double d3 = orient(p1, p2, q1);
  const double d4 = orient(p1, p2, q2);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
    return true;
  if (d1 == 0 && within_box(q1, q2, p1)) return true;
  if (d2 == 0 && within_box(q1, q2, p2)) return true;
  if (d3 == 0 && within_box(p1, p2, q1)) return true;
  if (d4 == 0 && within_box(p1, p2, q2)) return true;
  return false;
}

}  // namespace

bool is_simple(std::span<const Point> ring) {
  const std::size_t n = ring.size();
  if (n < 3) return false;
  struct Span {
    double lo, hi;
    std::size_t edge;
  };
  std::vector<Span> order(n);
  for (std::size_t e = 0; e < n; ++e) {
    const Point& a = ring[e];
    const Point& b = ring[(e + 1) % n];
    if (a == b) return false;
    order[e] = {std::min(a.x(), b.x()), std::max(a.x(), b.x()), e};
  }
  std::sort(order.begin(), order.end(),
            [](const Span& l, const Span& r) { return l.lo < r.lo || (l.lo == r.lo && l.edge < r.edge); });

  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = u + 1; v < n && order[v].lo <= order[u].hi; ++v) {
      const std::size_t i = std::min(order[u].edge, order[v].edge);
      const std::size_t j = std::max(order[u].edge, order[v].edge);
      const Point& a1 = ring[i];
      const Point& a2 = ring[(i + 1) % n];
      const Point& b1 = ring[j];
      const Point& b2 = ring[(j + 1) % n];
      if (std::max(a1.y(), a2.y()) < std::min(b1.y(), b2.y()) ||
          std::max(b1.y(), b2.y()) < std::min(a1.y(), a2.y()))
        continue;
      if (j == i + 1) {
        // shared vertex a2 == b1; fold-back shows up as a collinear overlap
        if (orient(a1, a2, b2) == 0 && within_box(a1, a2, b2)) return false;
        if (orient(b1, b2, a1) == 0 && within_box(b1, b2, a1)) return false;
        continue;
      }
      if (i == 0 && j == n - 1) {
        // shared vertex a1 == b2
        if (orient(a1, a2, b1) == 0 && within_box(a1, a2, b1)) return false;
        if (orient(b1, b2, a2) == 0 && within_box(b1, b2, a2)) return false;
        continue;
      }
      if (segments_touch(a1, a2, b1, b2)) return false;
    }
  }
  return true;
}

PrefractalPolygon build_koch(int generation, double side, int generation_cap) {
  if (generation < 0) throw Error(ErrorKind::Precondition, "koch generation must be >= 0");
  if (generation > generation_cap) {
    std::ostringstream os;
    os << "koch generation " << generation << " exceeds cap " << generation_cap;
    throw Error(ErrorKind::ResourceLimit, os.str());
  }
  if (!(side > 0)) throw Error(ErrorKind::Precondition, "koch side must be > 0");

  std::vector<Point> ring = {Point(0, 0), Point(side, 0), Point(0.5 * side, 0.5 * std::sqrt(3.0) * side)};
  const double h = std::sqrt(3.0) / 6.0;
  for (int g = 0; g < generation; ++g) {
    std::vector<Point> next;
    next.reserve(ring.size() * 4);
    for (std::size_t e = 0; e < ring.size(); ++e) {
      const Point& p = ring[e];
      const Point& q = ring[(e + 1) % ring.size()];
      const Point d = q - p;
      // outward side of a CCW edge is its right-hand side
      const Point peak = p + 0.5 * d + h * Point(d.y(), -d.x());
      next.push_back(p);
      next.push_back(p + d / 3.0);
      next.push_back(peak);
      next.push_back(p + 2.0 * d / 3.0);
    }
    ring = std::move(next);
  }

  PrefractalPolygon poly;
  poly.family = DomainFamily::Koch;
  poly.generation = generation;
  poly.dimension = std::log(4.0) / std::log(3.0);
  poly.tags.assign(ring.size(), EdgeTag::Fractal);
  poly.piece.resize(ring.size());
  std::iota(poly.piece.begin(), poly.piece.end(), 0);
  poly.vertices = std::move(ring);
  return poly;
}

std::pair<Similitude, Similitude> tree_maps(const TreeParams& p) {
  // f_2 rotates by -theta: (x cos + y sin, -x sin + y cos)
  return {Similitude(p.a, p.theta, false, Point(-p.alpha, p.beta)),
          Similitude(p.a, -p.theta, false, Point(p.alpha, p.beta))};
}

void validate_tree_params(const TreeParams& p) {
  auto fail = [](const std::string& why) { throw Error(ErrorKind::DomainParameter, "tree: " + why); };
  if (!(p.a > 0 && p.a < 1.0 / std::sqrt(2.0))) fail("need 0 < a < 1/sqrt(2)");
  if (!(p.alpha > 0)) fail("need alpha > 0");
  if (!(p.beta > 0)) fail("need beta > 0");
  if (!(p.theta > 0 && p.theta < std::numbers::pi / 2)) fail("need 0 < theta < pi/2");
  if (!(p.a * std::cos(p.theta) < p.alpha)) fail("need a cos(theta) < alpha");
  if (!(p.a * std::sin(p.theta) < p.beta)) fail("need a sin(theta) < beta");
  if (!((p.alpha - 1) * std::sin(p.theta) + p.beta * std::cos(p.theta) > 0))
    fail("need (alpha - 1) sin(theta) + beta cos(theta) > 0");
}

namespace {

struct TreeWalk {
  Similitude f1, f2;
  int depth_limit;
  std::vector<Point> ring;
  std::vector<EdgeTag> tags;
  std::vector<int> piece;
  int next_piece = 0;

  void push(const Point& p, EdgeTag tag_of_next_edge, int piece_of_next_edge) {
    ring.push_back(p);
    tags.push_back(tag_of_next_edge);
    piece.push_back(piece_of_next_edge);
  }

  // Emits the boundary path of the subtree rooted at the cell `map(K_0)`
  // from map(P_2) up to, but excluding, map(P_1).
  void walk(const Similitude& map, int depth) {
    const Point P1(-1, 0), P2(1, 0);
    const Similitude c1 = map.compose(f1);
    const Similitude c2 = map.compose(f2);
    const bool leaf = depth == depth_limit;
    push(map(P2), EdgeTag::Smooth, -1);
    if (leaf) {
      push(c2(P2), EdgeTag::Fractal, next_piece++);
    } else {
      walk(c2, depth + 1);
    }
    push(c2(P1), EdgeTag::Smooth, -1);
    if (leaf) {
      push(c1(P2), EdgeTag::Fractal, next_piece++);
    } else {
      walk(c1, depth + 1);
    }
    push(c1(P1), EdgeTag::Smooth, -1);
  }
};

}  // namespace

PrefractalPolygon build_tree(const TreeParams& params, int generation) {
  validate_tree_params(params);
  if (generation < 0) throw Error(ErrorKind::Precondition, "tree generation must be >= 0");
  if (generation > 12) throw Error(ErrorKind::ResourceLimit, "tree generation exceeds cap 12");

  auto [f1, f2] = tree_maps(params);
  TreeWalk walker{f1, f2, generation, {}, {}, {}, 0};
  walker.push(Point(-1, 0), EdgeTag::Smooth, -1);  // base segment P_1 -> P_2
  walker.walk(Similitude::identity(), 0);

  PrefractalPolygon poly;
  poly.family = DomainFamily::Tree;
  poly.generation = generation;
  poly.dimension = -std::log(2.0) / std::log(params.a);
  poly.vertices = std::move(walker.ring);
  poly.tags = std::move(walker.tags);
  poly.piece = std::move(walker.piece);
  if (!is_simple(poly.vertices) || poly.signed_area() <= 0)
    throw Error(ErrorKind::SelfContact, "tree cells overlap; decrease a below the self-contact threshold");
  return poly;
}

PrefractalPolygon build_cusp(double gamma, double length, double l, int segments) {
  if (!(gamma > 0 && gamma < 1)) throw Error(ErrorKind::DomainParameter, "cusp: need 0 < gamma < 1");
  if (!(length > 0) || !(l > 0)) throw Error(ErrorKind::DomainParameter, "cusp: need L > 0 and l > 0");
  if (segments < 4) throw Error(ErrorKind::Precondition, "cusp: need segments >= 4");

  constexpr double kGrading = 0.7;
  std::vector<double> heights;
  for (int j = segments - 1; j >= 0; --j) heights.push_back(length * std::pow(kGrading, j));
  const double c = std::sqrt(l);
  auto half_width = [&](double x2) { return c * std::pow(x2, 1.0 / gamma); };

  PrefractalPolygon poly;
  poly.family = DomainFamily::Cusp;
  poly.vertices.push_back(Point(0, 0));
  for (double y : heights) poly.vertices.push_back(Point(half_width(y), y));
  for (auto it = heights.rbegin(); it != heights.rend(); ++it) poly.vertices.push_back(Point(-half_width(*it), *it));
  poly.tags.assign(poly.vertices.size(), EdgeTag::Smooth);
  poly.piece.assign(poly.vertices.size(), -1);
  poly.dimension = 1.0;
  poly.sobolev_exponent = (1.0 + gamma) / (1.0 - gamma);
  if (!is_simple(poly.vertices)) throw Error(ErrorKind::Geometry, "cusp sampling is not simple");
  return poly;
}

PrefractalPolygon build_square(double side) {
  if (!(side > 0)) throw Error(ErrorKind::Precondition, "square side must be > 0");
  PrefractalPolygon poly;
  poly.family = DomainFamily::Square;
  poly.vertices = {Point(0, 0), Point(side, 0), Point(side, side), Point(0, side)};
  poly.tags.assign(4, EdgeTag::Smooth);
  poly.piece.assign(4, -1);
  return poly;
}

PrefractalPolygon scaled(const PrefractalPolygon& poly, double factor) {
  PrefractalPolygon out = poly;
  for (Point& p : out.vertices) p *= factor;
  return out;
}

std::string_view to_string(MeasureKind kind) {
  switch (kind) {
    case MeasureKind::Sigma: return "sigma";
    case MeasureKind::Hausdorff: return "hausdorff";
    case MeasureKind::Mixed: return "mixed";
    case MeasureKind::Dirichlet: return "dirichlet";
    case MeasureKind::SigmaFractalDirichlet: return "sigma_inf_fractal";
    case MeasureKind::Zero: return "zero";
  }
  return "?";
}

MeasureKind parse_measure_kind(std::string_view name) {
  for (MeasureKind k : {MeasureKind::Sigma, MeasureKind::Hausdorff, MeasureKind::Mixed, MeasureKind::Dirichlet,
                        MeasureKind::SigmaFractalDirichlet, MeasureKind::Zero})
    if (to_string(k) == name) return k;
  throw Error(ErrorKind::Config, "unknown measure kind '" + std::string(name) + "'");
}

namespace {

// Self-similar measure restricted to the fractal part. Polygons without a
// fractal part carry normalized arclength, the d = 1 case.
void hausdorff_weights(const PrefractalPolygon& poly, const MeasureOptions& opt, std::vector<double>& w) {
  const std::size_t n = poly.edge_count();
  const int pieces = poly.piece_count();
  if (pieces == 0) {
    const double perimeter = poly.perimeter();
    for (std::size_t e = 0; e < n; ++e)
      w[e] = opt.normalize ? opt.total_mass * poly.edge_length(e) / perimeter : poly.edge_length(e);
    return;
  }
  std::vector<int> edges_in_piece(pieces, 0);
  std::vector<double> piece_length(pieces, 0.0);
  for (std::size_t e = 0; e < n; ++e) {
    if (poly.piece[e] < 0) continue;
    ++edges_in_piece[poly.piece[e]];
    piece_length[poly.piece[e]] += poly.edge_length(e);
  }
  for (std::size_t e = 0; e < n; ++e) {
    const int p = poly.piece[e];
    if (p < 0) continue;
    const double piece_mass =
        opt.normalize ? opt.total_mass / pieces : std::pow(piece_length[p], poly.dimension);
    w[e] = piece_mass / edges_in_piece[p];
  }
}

}  // namespace

BoundaryMeasure attach_measure(const PrefractalPolygon& poly, MeasureKind kind, const MeasureOptions& options) {
  const std::size_t n = poly.edge_count();
  const bool needs_mass = kind == MeasureKind::Hausdorff || kind == MeasureKind::Mixed;
  if (needs_mass && options.normalize && !(options.total_mass > 0))
    throw Error(ErrorKind::Precondition, "measure total_mass must be > 0");
  if (kind == MeasureKind::Mixed && !(options.smooth_scale >= 0))
    throw Error(ErrorKind::Precondition, "measure smooth_scale must be >= 0");

  BoundaryMeasure m;
  m.kind = kind;
  m.weights.assign(n, 0.0);
  m.edge_infinite.assign(n, false);
  switch (kind) {
    case MeasureKind::Sigma:
      for (std::size_t e = 0; e < n; ++e) m.weights[e] = poly.edge_length(e);
      break;
    case MeasureKind::Hausdorff:
      hausdorff_weights(poly, options, m.weights);
      break;
    case MeasureKind::Mixed:
      if (poly.piece_count() > 0) hausdorff_weights(poly, options, m.weights);
      for (std::size_t e = 0; e < n; ++e)
        if (poly.tags[e] == EdgeTag::Smooth) m.weights[e] = options.smooth_scale * poly.edge_length(e);
      break;
    case MeasureKind::Dirichlet:
      m.edge_infinite.assign(n, true);
      break;
    case MeasureKind::SigmaFractalDirichlet:
      for (std::size_t e = 0; e < n; ++e) {
        if (poly.tags[e] == EdgeTag::Fractal)
          m.edge_infinite[e] = true;
        else
          m.weights[e] = poly.edge_length(e);
      }
      break;
    case MeasureKind::Zero:
      break;
  }
  m.node_dirichlet.assign(n, false);
  for (std::size_t e = 0; e < n; ++e) {
    if (!m.edge_infinite[e]) continue;
    m.node_dirichlet[e] = true;
    m.node_dirichlet[(e + 1) % n] = true;
  }
  m.total_mass = std::accumulate(m.weights.begin(), m.weights.end(), 0.0);
  return m;
}

}  // namespace frd
