#pragma once

// Rough planar domains: Koch snowflake prefractals, ramified tree domains,
// Hoelder cusps and a smooth square baseline, each as a simple CCW polygon
// whose edges remember whether they approximate the fractal part of the
// boundary. Boundary measures are discretized per polygon edge.

#include <Eigen/Core>

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace frd {

using Point = Eigen::Vector2d;

/// x -> translation + scale * R(angle) * J x, with J = diag(1, -1) when
/// reflecting and the identity otherwise.
class Similitude {
 public:
  Similitude() = default;
  Similitude(double scale, double angle, bool reflect, Point translation);

  static Similitude identity() { return {}; }

  Point operator()(const Point& p) const;

  /// (*this) o inner, i.e. inner is applied first.
  Similitude compose(const Similitude& inner) const;

  double scale() const { return scale_; }
  double angle() const { return angle_; }
  bool reflect() const { return reflect_; }
  const Point& translation() const { return translation_; }

 private:
  double scale_ = 1.0;
  double angle_ = 0.0;
  bool reflect_ = false;
  Point translation_ = Point::Zero();
};

enum class DomainFamily { Square, Koch, Tree, Cusp };
enum class EdgeTag { Fractal, Smooth };

std::string_view to_string(DomainFamily family);
std::string_view to_string(EdgeTag tag);

/// Edge i joins vertices[i] and vertices[(i + 1) % n].
struct PrefractalPolygon {
  DomainFamily family = DomainFamily::Square;
  std::vector<Point> vertices;
  std::vector<EdgeTag> tags;
  /// Self-similar generator piece owning each edge; -1 on smooth edges.
  std::vector<int> piece;
  int generation = 0;
  /// Nominal Hausdorff dimension of the fractal part (1 for smooth domains).
  double dimension = 1.0;
  /// Sobolev exponent (N-1+gamma)/(N-1-gamma) recorded for cusp domains.
  std::optional<double> sobolev_exponent;

  std::size_t edge_count() const { return vertices.size(); }
  const Point& edge_start(std::size_t e) const { return vertices[e]; }
  const Point& edge_end(std::size_t e) const { return vertices[(e + 1) % vertices.size()]; }
  double edge_length(std::size_t e) const { return (edge_end(e) - edge_start(e)).norm(); }
  double perimeter() const;
  double signed_area() const;
  int piece_count() const;
};

double signed_area(std::span<const Point> ring);

/// Exhaustive check that no two non-adjacent edges of the closed ring
/// touch and adjacent edges meet only at their shared vertex.
bool is_simple(std::span<const Point> ring);

inline constexpr int kDefaultKochCap = 7;

PrefractalPolygon build_koch(int generation, double side, int generation_cap = kDefaultKochCap);

struct TreeParams {
  double a = 0.6;
  double alpha = 1.2;
  double beta = 1.6;
  double theta = 0.8;
};

/// The two similitudes f_1, f_2 generating the ramified tree.
std::pair<Similitude, Similitude> tree_maps(const TreeParams& params);

void validate_tree_params(const TreeParams& params);

PrefractalPolygon build_tree(const TreeParams& params, int generation);

/// Polygonal sampling of |x1| < sqrt(l) x2^(1/gamma), 0 < x2 <= length,
/// graded geometrically toward the tip.
PrefractalPolygon build_cusp(double gamma, double length, double l, int segments);

PrefractalPolygon build_square(double side);

/// Dilation about the origin.
PrefractalPolygon scaled(const PrefractalPolygon& poly, double factor);

enum class MeasureKind {
  Sigma,      ///< arclength on every edge
  Hausdorff,  ///< self-similar measure on the fractal part
  Mixed,      ///< Hausdorff on the fractal part, arclength elsewhere
  Dirichlet,  ///< locally infinite on the whole boundary
  SigmaFractalDirichlet,  ///< arclength, locally infinite on the fractal part
  Zero,       ///< the zero measure
};

std::string_view to_string(MeasureKind kind);
MeasureKind parse_measure_kind(std::string_view name);

struct MeasureOptions {
  /// Total mass of the Hausdorff part (ignored for sigma).
  double total_mass = 1.0;
  /// Arclength multiplier on smooth edges for the mixed kind.
  double smooth_scale = 1.0;
  /// When false, a generator piece of length L carries mass L^d.
  bool normalize = true;
};

struct BoundaryMeasure {
  MeasureKind kind = MeasureKind::Sigma;
  std::vector<double> weights;         // per polygon edge
  std::vector<bool> edge_infinite;     // edge lies in the locally infinite part
  std::vector<bool> node_dirichlet;    // per polygon vertex
  double total_mass = 0.0;
};

BoundaryMeasure attach_measure(const PrefractalPolygon& poly, MeasureKind kind,
                               const MeasureOptions& options = {});

}  // namespace frd
