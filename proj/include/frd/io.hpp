#pragma once

// Plain-text artifact formats. Reals are written with 17 significant digits
// so files round-trip exactly and reruns are byte-identical.

#include "frd/dynamics.hpp"

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace frd {

std::string format_real(double x);

void write_polygon(std::ostream& os, const PrefractalPolygon& poly);
PrefractalPolygon read_polygon(std::istream& is);

void write_measure(std::ostream& os, const BoundaryMeasure& measure);

void write_mesh(std::ostream& os, const TriMesh& mesh, const MeshMeasure& measure);

/// "rows cols nnz" then "i j value" for the upper triangle, sorted.
void write_matrix(std::ostream& os, const SparseMatrix& m);

void write_trajectory(std::ostream& os, const TrajectoryRecord& traj);

/// One nodal value per line.
void write_nodal(std::ostream& os, const Vector& v);
Vector read_nodal(std::istream& is);

void write_eigenreport(std::ostream& os, const AssembledOperator& op, const std::vector<EigenPair>& pairs);

/// One line of the property-suite report.
struct SuiteRow {
  std::string check_id;
  std::string domain;
  std::string measure;
  std::string s;
  std::string status;  // pass | fail | skip | report
  std::string metric;
};

void write_suite_report(std::ostream& os, const std::vector<SuiteRow>& rows);

/// Whole-file helpers; both throw Io errors naming the path.
void write_file(const std::filesystem::path& path, const std::string& contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace frd
