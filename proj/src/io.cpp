#include "frd/io.hpp"

#include "frd/error.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <tuple>

namespace frd {

std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_polygon(std::ostream& os, const PrefractalPolygon& poly) {
  os << "vertices " << poly.edge_count() << '\n';
  for (std::size_t i = 0; i < poly.edge_count(); ++i)
    os << format_real(poly.vertices[i].x()) << ' ' << format_real(poly.vertices[i].y()) << ' '
       << to_string(poly.tags[i]) << '\n';
}

PrefractalPolygon read_polygon(std::istream& is) {
  std::string word;
  std::size_t n = 0;
  if (!(is >> word >> n) || word != "vertices") throw Error(ErrorKind::Io, "polygon file: expected 'vertices E'");
  PrefractalPolygon poly;
  for (std::size_t i = 0; i < n; ++i) {
    double x, y;
    std::string tag;
    if (!(is >> x >> y >> tag)) throw Error(ErrorKind::Io, "polygon file: truncated vertex list");
    poly.vertices.emplace_back(x, y);
    if (tag == to_string(EdgeTag::Fractal)) poly.tags.push_back(EdgeTag::Fractal);
    else if (tag == to_string(EdgeTag::Smooth)) poly.tags.push_back(EdgeTag::Smooth);
    else throw Error(ErrorKind::Io, "polygon file: unknown edge tag '" + tag + "'");
    poly.piece.push_back(poly.tags.back() == EdgeTag::Fractal ? static_cast<int>(i) : -1);
  }
  return poly;
}

void write_measure(std::ostream& os, const BoundaryMeasure& measure) {
  os << "edges " << measure.weights.size() << ' ' << format_real(measure.total_mass) << '\n';
  for (std::size_t e = 0; e < measure.weights.size(); ++e)
    os << format_real(measure.weights[e]) << ' ' << (measure.edge_infinite[e] ? 1 : 0) << '\n';
}

void write_mesh(std::ostream& os, const TriMesh& mesh, const MeshMeasure& measure) {
  os << "nodes " << mesh.node_count() << " triangles " << mesh.triangle_count() << " bedges "
     << mesh.boundary.size() << '\n';
  for (const auto& p : mesh.nodes) os << format_real(p.x()) << ' ' << format_real(p.y()) << '\n';
  for (const auto& t : mesh.triangles) os << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  for (std::size_t b = 0; b < mesh.boundary.size(); ++b) {
    const auto& e = mesh.boundary[b];
    const bool dirichlet = measure.node_dirichlet[e.n1] && measure.node_dirichlet[e.n2];
    os << e.n1 << ' ' << e.n2 << ' ' << e.parent << ' ' << format_real(measure.edge_weight[b]) << ' '
       << (dirichlet ? 1 : 0) << '\n';
  }
}

void write_matrix(std::ostream& os, const SparseMatrix& m) {
  std::vector<std::tuple<Eigen::Index, Eigen::Index, double>> entries;
  for (Eigen::Index k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it)
      if (it.row() <= it.col()) entries.emplace_back(it.row(), it.col(), it.value());
  std::sort(entries.begin(), entries.end());
  os << m.rows() << ' ' << m.cols() << ' ' << entries.size() << '\n';
  for (const auto& [i, j, v] : entries) os << i << ' ' << j << ' ' << format_real(v) << '\n';
}

void write_trajectory(std::ostream& os, const TrajectoryRecord& traj) {
  os << "t,l2,linf,energy,lyapunov,en_residual,newton_iters\n";
  for (std::size_t k = 0; k < traj.time.size(); ++k)
    os << format_real(traj.time[k]) << ',' << format_real(traj.l2[k]) << ',' << format_real(traj.linf[k]) << ','
       << format_real(traj.energy[k]) << ',' << format_real(traj.lyapunov[k]) << ','
       << format_real(traj.en_residual[k]) << ',' << traj.newton_iters[k] << '\n';
}

void write_nodal(std::ostream& os, const Vector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) os << format_real(v[i]) << '\n';
}

Vector read_nodal(std::istream& is) {
  std::vector<double> values;
  double x;
  while (is >> x) values.push_back(x);
  if (!is.eof()) throw Error(ErrorKind::Io, "nodal file: unparsable value");
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

void write_eigenreport(std::ostream& os, const AssembledOperator& op, const std::vector<EigenPair>& pairs) {
  for (std::size_t j = 0; j < pairs.size(); ++j)
    os << j + 1 << ' ' << format_real(pairs[j].lambda) << ' ' << format_real(pairs[j].residual) << ' '
       << sign_changes(op, pairs[j].vector) << '\n';
}

void write_suite_report(std::ostream& os, const std::vector<SuiteRow>& rows) {
  for (const auto& r : rows)
    os << r.check_id << ' ' << r.domain << ' ' << r.measure << ' ' << r.s << ' ' << r.status << ' ' << r.metric
       << '\n';
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  out << contents;
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace frd
