#pragma once

// The property suite: structural checks of the discrete problem swept over
// a matrix of domains, boundary measures and nonlocal exponents.

#include "frd/config.hpp"
#include "frd/io.hpp"

#include <random>

namespace frd {

/// Off-diagonal entries all <= 0. Together with symmetric positive
/// definiteness this makes the matrix a nonsingular M-matrix.
bool has_nonpositive_offdiagonal(const SparseMatrix& S, double tol = 0.0);

/// Random combination of a constant and a few low-frequency cosines of the
/// node coordinates, rescaled to the mesh bounding box.
Vector random_smooth_function(const TriMesh& mesh, std::mt19937_64& rng, int modes = 6);

/// sup of the Maz'ya ratio over `samples` random smooth functions.
double mazya_sup(const TriMesh& mesh, const MeshMeasure& sigma, int samples, std::uint64_t seed);

/// Ratio of the largest per-step energy-identity residuals at dt and dt/2.
double energy_order_ratio(const Problem& problem, const Nonlinearity& f, const FemFunction& u0, double dt,
                          double final_time, Scheme scheme = Scheme::Imex);

struct SuiteReport {
  std::vector<SuiteRow> rows;
  bool passed = true;
};

/// Rows run in parallel on up to thread_cap() workers; the report order is
/// fixed by the row keys, so output does not depend on the thread count.
SuiteReport property_suite(const SuiteSpec& spec, std::uint64_t seed);

}  // namespace frd
