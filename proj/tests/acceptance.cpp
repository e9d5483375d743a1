// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "oracles.hpp"

#include "frd/dynamics.hpp"
#include "frd/error.hpp"
#include "frd/io.hpp"
#include "frd/problem.hpp"
#include "frd/suite.hpp"

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>

using namespace frd;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string metric;
};

std::string fmt(const char* pattern, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c);
  return buf;
}

ProblemSpec spec(DomainFamily family, MeasureKind kind, int refine) {
  ProblemSpec ps;
  ps.domain.family = family;
  ps.domain.generation = family == DomainFamily::Koch ? 2 : family == DomainFamily::Tree ? 3 : 0;
  ps.refine = refine;
  ps.measure = kind;
  return ps;
}

const DomainFamily kDomains[] = {DomainFamily::Square, DomainFamily::Koch, DomainFamily::Tree};
const MeasureKind kMeasures[] = {MeasureKind::Sigma, MeasureKind::Hausdorff, MeasureKind::Dirichlet};

// lambda_1 < 1: the Chaffee-Infante zero state is unstable.
ProblemSpec weak_square() {
  ProblemSpec ps = spec(DomainFamily::Square, MeasureKind::Hausdorff, 3);
  ps.measure_options.total_mass = 0.05;
  return ps;
}

double mnorm(const SparseMatrix& M, const Vector& x) { return std::sqrt(std::max(0.0, x.dot(M * x))); }

FemFunction scaled_random(const Problem& p, std::uint64_t seed, double sup) {
  FemFunction u = make_initial("random:1", p.op, seed);
  return u * (sup / u.cwiseAbs().maxCoeff());
}

Outcome matrix_invariants() {
  double worst_sym = 0, worst_const = 0;
  bool ok = true;
  for (auto d : kDomains)
    for (auto m : kMeasures)
      for (double s : {0.25, 0.5, 0.75}) {
        ProblemSpec ps = spec(d, m, 1);
        ps.s = s;
        const Problem p = build_problem(ps);
        const auto r = check_matrix_invariants(p.op, 17, 20);
        worst_sym = std::max(worst_sym, r.symmetry_defect);
        worst_const = std::max(worst_const, r.nonlocal_constant);
        ok = ok && r.passed && r.nonlocal_constant <= 1e-12;
      }
  return {ok, fmt("symmetry=%.2e nonlocal_constant=%.2e", worst_sym, worst_const)};
}

Outcome dirichlet_oracle() {
  const Problem p = build_problem(spec(DomainFamily::Square, MeasureKind::Dirichlet, 6));
  const double lambda = solve_eigs(p.op, p.M(), 1)[0].lambda;
  const double rel = std::abs(lambda - oracle::two_pi_squared) / oracle::two_pi_squared;
  return {rel <= 0.02, fmt("lambda1=%.6f target=%.6f rel=%.2e", lambda, oracle::two_pi_squared, rel)};
}

Outcome robin_oracle() {
  ProblemSpec ps = spec(DomainFamily::Square, MeasureKind::Sigma, 6);
  ps.nonlocal = false;
  const Problem p = build_problem(ps);
  const double lambda = solve_eigs(p.op, p.M(), 1)[0].lambda;
  const double target = 2 * oracle::robin_1d_lambda1(1.0);
  const double rel = std::abs(lambda - target) / target;
  return {rel <= 0.02, fmt("lambda1=%.6f target=%.6f rel=%.2e", lambda, target, rel)};
}

Outcome contraction() {
  const Nonlinearity zero = make_nonlinearity("zero");
  EvolveOptions o;
  o.dt = 0.01;
  o.final_time = 0.2;
  o.snapshot_stride = 0;
  double worst = -1;
  for (auto d : kDomains) {
    const Problem p = build_problem(spec(d, MeasureKind::Sigma, 1));
    for (int seed = 0; seed < 50; ++seed) {
      const auto r = evolve(p.op, p.M(), make_initial("random:1", p.op, 1000 + seed), zero, o);
      for (std::size_t k = 1; k < r.l2.size(); ++k) worst = std::max(worst, (r.l2[k] - r.l2[k - 1]) / r.l2[k - 1]);
    }
  }
  return {worst <= 1e-10, fmt("max_rel_growth=%.3e", worst)};
}

Outcome linf_and_order() {
  const Nonlinearity zero = make_nonlinearity("zero");
  EvolveOptions o;
  o.dt = 0.01;
  o.final_time = 0.4;
  bool gated_ok = true;
  int gated = 0;
  std::string reported;
  for (auto d : kDomains)
    for (auto m : {MeasureKind::Sigma, MeasureKind::Hausdorff}) {
      ProblemSpec ps = spec(d, m, d == DomainFamily::Square ? 3 : 1);
      ps.lumped_mass = true;
      ps.lumped_boundary = true;
      const Problem p = build_problem(ps);
      const SparseMatrix S = p.op.restrict_matrix(p.M()) + o.dt * p.op.A_free;
      const bool m_matrix = has_nonpositive_offdiagonal(S, 1e-12 * S.diagonal().cwiseAbs().maxCoeff());
      double growth = -1e300, gap = 1e300;
      for (int seed = 0; seed < 10; ++seed) {
        const FemFunction v0 = make_initial("random:1", p.op, 2000 + seed);
        const FemFunction u0 = v0 + make_initial("random:1", p.op, 3000 + seed).cwiseAbs();
        const auto ru = evolve(p.op, p.M(), u0, zero, o);
        const auto rv = evolve(p.op, p.M(), v0, zero, o);
        for (std::size_t k = 1; k < rv.linf.size(); ++k) growth = std::max(growth, rv.linf[k] - rv.linf[k - 1]);
        for (std::size_t k = 0; k < ru.snapshots.size(); ++k)
          gap = std::min(gap, (ru.snapshots[k].second - rv.snapshots[k].second).minCoeff());
      }
      const bool ok = growth <= 1e-10 && gap >= -1e-10;
      if (d == DomainFamily::Square) {
        ++gated;
        gated_ok = gated_ok && m_matrix && ok;
      } else {
        reported += std::string(" ") + std::string(to_string(d)) + "/" + std::string(to_string(m)) +
                    (m_matrix ? ":mmatrix" : ":report") + (ok ? "=ok" : "=violated");
      }
    }
  return {gated_ok && gated > 0, "gated_square=" + std::string(gated_ok ? "ok" : "violated") + reported};
}

Outcome lyapunov_descent() {
  const Nonlinearity ci = make_nonlinearity("chaffee_infante");
  EvolveOptions o;
  o.scheme = Scheme::Implicit;
  o.dt = 0.01;
  o.final_time = 5.0;
  o.snapshot_stride = 0;
  double worst = -1e300;
  std::size_t steps = 0;
  for (auto d : {DomainFamily::Koch, DomainFamily::Square}) {
    const Problem p = build_problem(spec(d, MeasureKind::Sigma, d == DomainFamily::Square ? 3 : 1));
    const auto r = evolve(p.op, p.M(), make_initial("random:2", p.op, 4000), ci, o);
    steps = r.steps();
    for (std::size_t k = 1; k < r.lyapunov.size(); ++k)
      worst = std::max(worst, (r.lyapunov[k] - r.lyapunov[k - 1]) / (1 + std::abs(r.lyapunov[k - 1])));
  }
  return {worst <= 1e-8 && steps == 500, fmt("steps=%.0f max_rel_increase=%.3e", static_cast<double>(steps), worst)};
}

Outcome energy_order() {
  const Problem p = build_problem(spec(DomainFamily::Square, MeasureKind::Sigma, 3));
  const auto pairs = solve_eigs(p.op, p.M(), 1);
  const double ratio = energy_order_ratio(p, make_nonlinearity("chaffee_infante"), pairs[0].vector, 0.01, 0.5);
  return {ratio >= 1.3 && ratio <= 2.7, fmt("ratio=%.4f", ratio)};
}

Outcome absorbing_ball() {
  const Problem p = build_problem(weak_square());
  const Nonlinearity ci = make_nonlinearity("chaffee_infante");
  EvolveOptions o;
  o.scheme = Scheme::Implicit;
  o.dt = 0.01;
  o.final_time = 10.0;
  o.snapshot_stride = 0;
  // Radius of each run: the largest L2 norm over its last half.
  std::vector<double> radii, starts;
  std::vector<TrajectoryRecord> runs;
  for (double amp : {1.0, 5.0, 25.0})
    for (int seed = 0; seed < 3; ++seed) {
      auto r = evolve(p.op, p.M(), scaled_random(p, 5000 + 10 * seed + static_cast<int>(amp), amp), ci, o);
      double radius = 0;
      for (std::size_t k = 0; k < r.time.size(); ++k)
        if (r.time[k] >= 5.0) radius = std::max(radius, r.l2[k]);
      radii.push_back(radius);
      starts.push_back(r.l2.front());
      runs.push_back(std::move(r));
    }
  const double lo = *std::min_element(radii.begin(), radii.end());
  const double hi = *std::max_element(radii.begin(), radii.end());
  // common ball: every run is inside by t = 10 and stays inside afterwards
  const double ball = 1.1 * hi;
  bool stays = true;
  for (const auto& r : runs) {
    std::size_t enter = r.l2.size();
    for (std::size_t k = r.l2.size(); k-- > 0 && r.l2[k] <= ball;) enter = k;
    stays = stays && enter < r.l2.size() && r.time[enter] <= 10.0;
  }
  const double max_start = *std::max_element(starts.begin(), starts.end());
  return {lo > 0 && hi <= 1.1 * lo && stays,
          fmt("radius_min=%.6f radius_max=%.6f max_initial_l2=%.3f", lo, hi, max_start)};
}

Outcome pairwise_contraction() {
  const Nonlinearity ci = make_nonlinearity("chaffee_infante");
  EvolveOptions o;
  o.dt = 0.01;
  o.final_time = 3.0;
  double fitted = -1e300, stepwise = -1e300;
  // Small data near the unstable zero state makes the bound nearly sharp.
  const std::pair<ProblemSpec, double> cases[] = {
      {weak_square(), 1e-3},
      {weak_square(), 1.0},
      {spec(DomainFamily::Koch, MeasureKind::Sigma, 1), 1.0},
      {spec(DomainFamily::Tree, MeasureKind::Hausdorff, 1), 1.0},
  };
  int index = 0;
  for (const auto& [ps, amp] : cases) {
    const Problem p = build_problem(ps);
    const auto a = evolve(p.op, p.M(), scaled_random(p, 6000 + index, amp), ci, o);
    const auto b = evolve(p.op, p.M(), scaled_random(p, 7000 + index, amp), ci, o);
    ++index;
    std::vector<double> t, logd;
    for (std::size_t k = 0; k < a.snapshots.size(); ++k) {
      const double d = mnorm(p.M(), a.snapshots[k].second - b.snapshots[k].second);
      t.push_back(a.time[static_cast<std::size_t>(a.snapshots[k].first)]);
      logd.push_back(std::log(d * d));
      if (k > 0) stepwise = std::max(stepwise, (logd[k] - logd[k - 1]) / (t[k] - t[k - 1]));
    }
    fitted = std::max(fitted, fit_slope(t, logd));
  }
  const double bound = 2 * ci.derivative_lower_bound * 1.1;
  return {fitted <= bound && stepwise <= bound, fmt("fitted=%.4f stepwise=%.4f bound=%.2f", fitted, stepwise, bound)};
}

std::vector<EquilibriumResult> equilibria(const Problem& p, const Nonlinearity& f) {
  const auto pairs = solve_eigs(p.op, p.M(), 1);
  std::vector<FemFunction> seeds = {Vector::Zero(pairs[0].vector.size()), pairs[0].vector, -pairs[0].vector};
  for (int j = 0; j < 4; ++j) seeds.push_back(make_initial("random:2", p.op, 8000 + j));
  std::vector<EquilibriumResult> found;
  for (const auto& s : seeds) {
    try {
      found.push_back(find_equilibrium(p.op, p.M(), f, s));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NonConvergence) throw;
    }
  }
  return deduplicate(std::move(found), p.M());
}

Outcome bifurcation() {
  const Nonlinearity ci = make_nonlinearity("chaffee_infante");
  const Problem weak = build_problem(weak_square());
  const Problem strong = build_problem(spec(DomainFamily::Square, MeasureKind::Sigma, 3));
  const double l_weak = solve_eigs(weak.op, weak.M(), 1)[0].lambda;
  const double l_strong = solve_eigs(strong.op, strong.M(), 1)[0].lambda;
  const auto eq_weak = equilibria(weak, ci);
  const auto eq_strong = equilibria(strong, ci);
  const bool only_zero = eq_strong.size() == 1 && eq_strong[0].state.cwiseAbs().maxCoeff() < 1e-8;

  EvolveOptions o;
  o.scheme = Scheme::Implicit;
  o.dt = 0.05;
  o.final_time = 50.0;
  o.snapshot_stride = 20;
  double worst_dudt = 0, worst_distance = 0;
  for (const auto* pair : {&weak, &strong}) {
    const auto& set = pair == &weak ? eq_weak : eq_strong;
    for (int j = 0; j < 4; ++j) {
      const auto traj = evolve(pair->op, pair->M(), make_initial("random:1", pair->op, 9000 + j), ci, o);
      const auto rep = probe_convergence(traj, set, pair->M());
      worst_dudt = std::max(worst_dudt, rep.final_dudt);
      worst_distance = std::max(worst_distance, rep.nearest_distance);
    }
  }
  const bool ok = l_weak < 1 && l_strong > 1 && eq_weak.size() >= 3 && only_zero && worst_dudt < 1e-6 &&
                  worst_distance < 1e-4;
  return {ok, fmt("lambda1_weak=%.4f lambda1_strong=%.4f final_dudt=%.2e", l_weak, l_strong, worst_dudt) +
                  " equilibria=" + std::to_string(eq_weak.size()) + "/" + std::to_string(eq_strong.size()) +
                  fmt(" distance=%.2e", worst_distance)};
}

Outcome mazya() {
  double sups[2];
  for (int level = 0; level < 2; ++level) {
    const Problem p = build_mesh_only(spec(DomainFamily::Koch, MeasureKind::Sigma, 1 + level));
    sups[level] = mazya_sup(p.mesh, p.mesh_measure, 1000, 99);
  }
  const double change = std::abs(sups[1] / sups[0] - 1);
  return {std::isfinite(sups[0]) && std::isfinite(sups[1]) && change <= 0.2,
          fmt("sup_coarse=%.5f sup_fine=%.5f change=%.3f", sups[0], sups[1], change)};
}

int run_cli(const fs::path& dir, const std::string& env, const std::string& args) {
  fs::create_directories(dir);
  const std::string cmd =
      "cd '" + dir.string() + "' && " + env + " '" + std::string(FRD_CLI_PATH) + "' " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "frd_acceptance_determinism";
  fs::remove_all(root);
  const std::pair<const char*, const char*> runs[] = {
      {"a", ""}, {"b", ""}, {"t1", "FRD_THREADS=1"}, {"t4", "FRD_THREADS=4"}};
  std::vector<std::string> reports;
  bool exits_ok = true;
  for (const auto& [name, env] : runs) {
    exits_ok = exits_ok && run_cli(root / name, env, "diagnose") == 0;
    reports.push_back(read_file(root / name / "run" / "suite_report.txt"));
  }
  bool same = true;
  for (const auto& r : reports) same = same && r == reports.front();
  const auto lines = std::count(reports.front().begin(), reports.front().end(), '\n');
  fs::remove_all(root);
  return {exits_ok && same && lines > 0,
          std::string("identical=") + (same ? "yes" : "no") + " exit0=" + (exits_ok ? "yes" : "no") +
              " rows=" + std::to_string(lines)};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
    double budget_s;
  };
  const Criterion criteria[] = {
      {1, "matrix_invariants", matrix_invariants, 60},
      {2, "dirichlet_oracle", dirichlet_oracle, 120},
      {3, "robin_oracle", robin_oracle, 120},
      {4, "l2_contraction", contraction, 60},
      {5, "linf_order", linf_and_order, 60},
      {6, "lyapunov_descent", lyapunov_descent, 180},
      {7, "energy_order", energy_order, 120},
      {8, "absorbing_ball", absorbing_ball, 180},
      {9, "pairwise_contraction", pairwise_contraction, 120},
      {10, "bifurcation", bifurcation, 300},
      {11, "mazya_ratio", mazya, 60},
      {12, "determinism", determinism, 600},
  };
  int failures = 0;
  const auto t_all = std::chrono::steady_clock::now();
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool pass = out.pass && secs <= c.budget_s;
    failures += !pass;
    std::printf("[%s] %d %s %s time=%.2fs\n", pass ? "PASS" : "FAIL", c.id, c.name, out.metric.c_str(), secs);
    std::fflush(stdout);
  }
  const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_all).count();
  std::printf("total time=%.2fs, %d failed\n", total, failures);
  return failures == 0 && total <= 600 ? 0 : 1;
}
