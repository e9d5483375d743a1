#include "frd/suite.hpp"

#include "frd/error.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <thread>

namespace frd {

bool has_nonpositive_offdiagonal(const SparseMatrix& S, double tol) {
  for (Eigen::Index k = 0; k < S.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(S, k); it; ++it)
      if (it.row() != it.col() && it.value() > tol) return false;
  return true;
}

Vector random_smooth_function(const TriMesh& mesh, std::mt19937_64& rng, int modes) {
  Point lo = mesh.nodes.front(), hi = mesh.nodes.front();
  for (const auto& p : mesh.nodes) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double span = std::max((hi - lo).maxCoeff(), 1e-300);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<int> freq(0, 3);
  std::uniform_real_distribution<double> phase(0.0, 2 * std::numbers::pi);
  Vector u = Vector::Constant(static_cast<Eigen::Index>(mesh.node_count()), gauss(rng));
  for (int m = 0; m < modes; ++m) {
    const double c = gauss(rng);
    const int a = freq(rng), b = freq(rng);
    const double phi = phase(rng);
    for (std::size_t i = 0; i < mesh.node_count(); ++i) {
      const Point q = (mesh.nodes[i] - lo) / span;
      u[static_cast<Eigen::Index>(i)] += c * std::cos(std::numbers::pi * (a * q.x() + b * q.y()) + phi);
    }
  }
  return u;
}

double mazya_sup(const TriMesh& mesh, const MeshMeasure& sigma, int samples, std::uint64_t seed) {
  const MazyaRatio ratio(mesh, sigma);
  std::mt19937_64 rng(seed);
  double sup = 0.0;
  for (int k = 0; k < samples; ++k) sup = std::max(sup, ratio(random_smooth_function(mesh, rng)));
  return sup;
}

double energy_order_ratio(const Problem& problem, const Nonlinearity& f, const FemFunction& u0, double dt,
                          double final_time, Scheme scheme) {
  auto worst = [&](double step) {
    EvolveOptions opt;
    opt.scheme = scheme;
    opt.dt = step;
    opt.final_time = final_time;
    opt.snapshot_stride = 0;
    const TrajectoryRecord r = evolve(problem.op, problem.M(), u0, f, opt);
    return *std::max_element(r.en_residual.begin(), r.en_residual.end());
  };
  const double coarse = worst(dt);
  const double fine = worst(0.5 * dt);
  if (!(fine > 0)) throw Error(ErrorKind::DegenerateInput, "energy residual vanishes at dt/2");
  return coarse / fine;
}

namespace {

std::string fmt(const char* name, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s=%.6e", name, v);
  return buf;
}

std::string fmt_s(double s) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", s);
  return buf;
}

struct RowKey {
  DomainFamily domain;
  MeasureKind measure;
  double s;
};

DomainSpec suite_domain(DomainFamily family, const SuiteSpec& spec) {
  DomainSpec d;
  d.family = family;
  d.generation = family == DomainFamily::Koch ? spec.koch_generation
                 : family == DomainFamily::Tree ? spec.tree_generation
                                                : 0;
  return d;
}

// Runs one named check and tags any failure of the machinery with its id.
template <class F>
void run_check(const char* id, F&& body) {
  try {
    body();
  } catch (const Error& e) {
    throw Error(e.kind(), std::string("check ") + id + ": " + e.detail());
  }
}

std::vector<SuiteRow> matrix_row(const RowKey& key, const SuiteSpec& spec, std::uint64_t seed) {
  const std::string domain(to_string(key.domain));
  const std::string measure(to_string(key.measure));
  const std::string s = fmt_s(key.s);
  std::vector<SuiteRow> rows;
  auto add = [&](const char* id, const char* status, std::string metric) {
    rows.push_back({id, domain, measure, s, status, std::move(metric)});
  };

  ProblemSpec ps;
  ps.domain = suite_domain(key.domain, spec);
  ps.refine = spec.refine;
  ps.measure = key.measure;
  ps.s = key.s;
  Problem problem;
  try {
    problem = build_problem(ps);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::Hypothesis) throw;
    add("hypothesis", "skip", "hypothesis_violation:H_mu");
    return rows;
  }
  const auto& op = problem.op;
  const auto& M = problem.M();

  run_check("matrix_invariants", [&] {
    const auto r = check_matrix_invariants(op, static_cast<unsigned>(seed), 20);
    add("matrix_invariants", r.passed ? "pass" : "fail", fmt("psd_margin", r.min_psd_margin));
  });

  const Nonlinearity zero = make_nonlinearity("zero");
  const Nonlinearity chaffee = make_nonlinearity("chaffee_infante");
  EvolveOptions linear;
  linear.dt = spec.dt;
  linear.final_time = spec.dt * spec.steps;
  linear.snapshot_stride = 1;

  run_check("l2_contraction", [&] {
    double worst = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < spec.seeds; ++j) {
      const auto r = evolve(op, M, make_initial("random:1", op, seed + 101 * j), zero, linear);
      for (std::size_t k = 1; k < r.l2.size(); ++k) worst = std::max(worst, (r.l2[k] - r.l2[k - 1]) / r.l2[k - 1]);
    }
    add("l2_contraction", worst <= 1e-10 ? "pass" : "fail", fmt("max_rel_growth", worst));
  });

  ProblemSpec lumped_spec = ps;
  lumped_spec.lumped_mass = true;
  lumped_spec.lumped_boundary = true;
  const Problem lumped = build_problem(lumped_spec);
  const SparseMatrix system = lumped.op.restrict_matrix(lumped.M()) + spec.dt * lumped.op.A_free;
  const double diag_scale = system.diagonal().cwiseAbs().maxCoeff();
  const bool m_matrix = has_nonpositive_offdiagonal(system, 1e-12 * diag_scale);

  run_check("linf_nonexpansive", [&] {
    double worst = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < spec.seeds; ++j) {
      const auto r = evolve(lumped.op, lumped.M(), make_initial("random:1", lumped.op, seed + 211 * j), zero, linear);
      for (std::size_t k = 1; k < r.linf.size(); ++k) worst = std::max(worst, r.linf[k] - r.linf[k - 1]);
    }
    const char* status = !m_matrix ? "report" : worst <= 1e-10 ? "pass" : "fail";
    add("linf_nonexpansive", status, fmt("max_growth", worst));
  });

  run_check("order_preservation", [&] {
    double worst = std::numeric_limits<double>::infinity();
    for (int j = 0; j < spec.seeds; ++j) {
      const FemFunction v0 = make_initial("random:1", lumped.op, seed + 307 * j);
      const FemFunction u0 = v0 + make_initial("random:1", lumped.op, seed + 307 * j + 1).cwiseAbs();
      const auto ru = evolve(lumped.op, lumped.M(), u0, zero, linear);
      const auto rv = evolve(lumped.op, lumped.M(), v0, zero, linear);
      for (std::size_t k = 0; k < ru.snapshots.size(); ++k)
        worst = std::min(worst, (ru.snapshots[k].second - rv.snapshots[k].second).minCoeff());
    }
    const char* status = !m_matrix ? "report" : worst >= -1e-10 ? "pass" : "fail";
    add("order_preservation", status, fmt("min_gap", worst));
  });

  run_check("lyapunov_descent", [&] {
    EvolveOptions implicit = linear;
    implicit.scheme = Scheme::Implicit;
    implicit.snapshot_stride = 0;
    const auto r = evolve(op, M, make_initial("random:1", op, seed + 401), chaffee, implicit);
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < r.lyapunov.size(); ++k)
      worst = std::max(worst, (r.lyapunov[k] - r.lyapunov[k - 1]) / (1.0 + std::abs(r.lyapunov[k - 1])));
    add("lyapunov_descent", worst <= 1e-8 ? "pass" : "fail", fmt("max_rel_increase", worst));
  });

  run_check("energy_order", [&] {
    const auto pairs = solve_eigs(op, M, 1);
    const double ratio = energy_order_ratio(problem, chaffee, pairs[0].vector, spec.dt, spec.dt * spec.steps);
    add("energy_order", ratio >= 1.3 && ratio <= 2.7 ? "pass" : "fail", fmt("ratio", ratio));
  });
  return rows;
}

std::vector<SuiteRow> mazya_row(DomainFamily family, const SuiteSpec& spec, std::uint64_t seed) {
  std::vector<SuiteRow> rows;
  run_check("mazya_ratio", [&] {
    ProblemSpec ps;
    ps.domain = suite_domain(family, spec);
    ps.refine = spec.refine;
    ps.measure = MeasureKind::Sigma;
    const Problem p = build_mesh_only(ps);
    const double sup = mazya_sup(p.mesh, p.mesh_measure, spec.mazya_samples, seed);
    const bool ok = std::isfinite(sup) && sup > 0;
    rows.push_back({"mazya_ratio", std::string(to_string(family)), "sigma", "-", ok ? "pass" : "fail",
                    fmt("sup", sup)});
  });
  return rows;
}

std::vector<SuiteRow> smoke_row(std::uint64_t seed) {
  std::vector<SuiteRow> rows;
  run_check("single_triangle", [&] {
    ProblemSpec ps;
    ps.domain.family = DomainFamily::Koch;
    ps.domain.generation = 0;
    ps.refine = 0;
    const Problem p = build_problem(ps);
    const auto r = check_matrix_invariants(p.op, static_cast<unsigned>(seed), 20);
    rows.push_back({"matrix_invariants", "single_triangle", "sigma", "0.5", r.passed ? "pass" : "fail",
                    fmt("psd_margin", r.min_psd_margin)});
  });
  return rows;
}

}  // namespace

SuiteReport property_suite(const SuiteSpec& spec, std::uint64_t seed) {
  std::vector<std::function<std::vector<SuiteRow>()>> tasks;
  for (DomainFamily d : spec.domains)
    for (MeasureKind m : spec.measures)
      for (double s : spec.s_values) {
        const std::uint64_t row_seed = seed * 7919 + tasks.size();
        tasks.emplace_back([=, &spec] { return matrix_row({d, m, s}, spec, row_seed); });
      }
  for (DomainFamily d : spec.domains) {
    const std::uint64_t row_seed = seed * 7919 + tasks.size();
    tasks.emplace_back([=, &spec] { return mazya_row(d, spec, row_seed); });
  }
  tasks.emplace_back([=, &spec] { return matrix_row({DomainFamily::Square, MeasureKind::Zero, 0.5}, spec, seed); });
  tasks.emplace_back([=] { return smoke_row(seed); });

  std::vector<std::vector<SuiteRow>> results(tasks.size());
  std::vector<std::exception_ptr> failures(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < tasks.size();) {
      try {
        results[i] = tasks[i]();
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  const unsigned n_threads = std::min<unsigned>(thread_cap(), static_cast<unsigned>(tasks.size()));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& f : failures)
    if (f) std::rethrow_exception(f);

  SuiteReport report;
  for (auto& r : results)
    for (auto& row : r) {
      if (row.status == "fail") report.passed = false;
      report.rows.push_back(std::move(row));
    }
  return report;
}

}  // namespace frd
