#include "frd/commands.hpp"

#include "frd/error.hpp"
#include "frd/io.hpp"
#include "frd/suite.hpp"
#include "frd/svg_plot.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

namespace frd {

namespace fs = std::filesystem;

namespace {

std::string to_text(auto&& writer) {
  std::ostringstream os;
  writer(os);
  return os.str();
}

std::string eigvec_name(int index) { return "eigvec_" + std::to_string(index) + ".txt"; }

std::string step_name(int step) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "step_%08d.txt", step);
  return buf;
}

Nonlinearity config_nonlinearity(const RunConfig& c) { return make_nonlinearity(c.nonlinearity, c.kappa); }

EigenProvider artifact_eigenvectors(const RunConfig& c, std::size_t nodes) {
  return [&c, nodes](int i) { return read_eigenvector(c, i, nodes); };
}

}  // namespace

Vector read_eigenvector(const RunConfig& config, int index, std::size_t node_count) {
  const fs::path path = config.output_dir / eigvec_name(index);
  if (!fs::exists(path))
    throw Error(ErrorKind::Config, "eig:" + std::to_string(index) + " needs " + path.string() +
                                       "; run the spectrum command first");
  std::istringstream is(read_file(path));
  Vector v = read_nodal(is);
  if (static_cast<std::size_t>(v.size()) != node_count)
    throw Error(ErrorKind::Config, path.string() + " does not match the current mesh");
  return v;
}

int run_guarded(const std::function<int()>& body, std::ostream& err) {
  try {
    return body();
  } catch (const BlowUpError& e) {
    err << "frd: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const Error& e) {
    err << "frd: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "frd: internal error: " << e.what() << '\n';
    return 4;
  }
}

int cmd_mesh(const RunConfig& c, std::ostream& out) {
  const Problem p = build_mesh_only(c.problem);
  const MeshStats st = mesh_stats(p.mesh);
  const fs::path dir = c.output_dir;
  write_file(dir / "polygon.txt", to_text([&](std::ostream& os) { write_polygon(os, p.poly); }));
  write_file(dir / "measure.txt", to_text([&](std::ostream& os) { write_measure(os, p.measure); }));
  write_file(dir / "mesh.txt", to_text([&](std::ostream& os) { write_mesh(os, p.mesh, p.mesh_measure); }));
  std::ostringstream stats;
  stats << "nodes = " << st.node_count << '\n'
        << "triangles = " << st.triangle_count << '\n'
        << "boundary_nodes = " << st.boundary_node_count << '\n'
        << "h_max = " << format_real(st.h_max) << '\n'
        << "h_min = " << format_real(st.h_min) << '\n'
        << "min_angle_deg = " << format_real(st.min_angle_deg) << '\n'
        << "polygon_edges = " << p.poly.edge_count() << '\n'
        << "area = " << format_real(p.mesh.area()) << '\n'
        << "measure_total_mass = " << format_real(p.mesh_measure.total_mass) << '\n';
  write_file(dir / "mesh_stats.txt", stats.str());
  write_file(dir / "manifest_mesh.txt", render_manifest(c));
  out << stats.str();
  return 0;
}

int cmd_evolve(const RunConfig& c, std::ostream& out) {
  const Problem p = build_problem(c.problem);
  const Nonlinearity f = config_nonlinearity(c);
  EvolveOptions opt;
  opt.scheme = c.scheme;
  opt.dt = c.dt ? *c.dt : default_time_step(p.op, p.M());
  opt.final_time = c.final_time;
  opt.snapshot_stride = c.snapshot_stride;
  opt.newton = c.newton;
  opt.blowup_threshold = c.blowup_threshold;
  if (!(opt.dt < opt.final_time))
    throw Error(ErrorKind::Config, "time.dt: resolved step " + format_real(opt.dt) + " is not below time.final_time");
  const FemFunction u0 = make_initial(c.initial, p.op, c.seed, artifact_eigenvectors(c, p.op.node_count()));
  const TrajectoryRecord r = evolve(p.op, p.M(), u0, f, opt);

  const fs::path dir = c.output_dir;
  write_file(dir / "trajectory.csv", to_text([&](std::ostream& os) { write_trajectory(os, r); }));
  fs::remove_all(dir / "snapshots");
  for (const auto& [step, state] : r.snapshots)
    write_file(dir / "snapshots" / step_name(step), to_text([&](std::ostream& os) { write_nodal(os, state); }));

  double max_residual = 0;
  for (double v : r.en_residual) max_residual = std::max(max_residual, v);
  std::ostringstream summary;
  summary << "steps = " << r.steps() << '\n'
          << "dt = " << format_real(r.dt) << '\n'
          << "final_time = " << format_real(r.time.back()) << '\n'
          << "final_l2 = " << format_real(r.l2.back()) << '\n'
          << "final_linf = " << format_real(r.linf.back()) << '\n'
          << "final_lyapunov = " << format_real(r.lyapunov.back()) << '\n'
          << "final_dudt = " << format_real(r.dudt.back()) << '\n'
          << "max_en_residual = " << format_real(max_residual) << '\n';
  // logged only; no threshold applies
  const auto holder = holder_exponent(r);
  summary << "holder_exponent = " << (holder ? format_real(*holder) : std::string("n/a")) << '\n';
  write_file(dir / "summary.txt", summary.str());
  write_file(dir / "manifest_evolve.txt",
             render_manifest(c, {{"time.dt", format_real(opt.dt)},
                                 {"derived.dt_source", c.dt ? "config" : "power_iteration"},
                                 {"derived.steps", std::to_string(r.steps())},
                                 {"derived.nodes", std::to_string(p.op.node_count())},
                                 {"derived.free_nodes", std::to_string(p.op.free_count())}}));
  out << summary.str();
  return 0;
}

int cmd_spectrum(const RunConfig& c, std::ostream& out) {
  const Problem p = build_problem(c.problem);
  const auto pairs = solve_eigs(p.op, p.M(), c.eig_count, c.eig_method);
  const fs::path dir = c.output_dir;
  const std::string report = to_text([&](std::ostream& os) { write_eigenreport(os, p.op, pairs); });
  write_file(dir / "eigenreport.txt", report);
  for (std::size_t j = 0; j < pairs.size(); ++j)
    write_file(dir / eigvec_name(static_cast<int>(j + 1)),
               to_text([&](std::ostream& os) { write_nodal(os, pairs[j].vector); }));
  const PositivityReport pos = check_principal_positivity(pairs, p.op);
  std::string lines;
  for (const auto& l : pos.lines) lines += l + '\n';
  lines += "coercivity_constant = " + format_real(coercivity_constant(pairs)) + '\n';
  write_file(dir / "positivity.txt", lines);
  write_file(dir / "manifest_spectrum.txt",
             render_manifest(c, {{"derived.free_nodes", std::to_string(p.op.free_count())}}));
  out << report << lines;
  return 0;
}

int cmd_equilibria(const RunConfig& c, std::ostream& out) {
  const Problem p = build_problem(c.problem);
  const Nonlinearity f = config_nonlinearity(c);
  const EigenProvider eigen = artifact_eigenvectors(c, p.op.node_count());
  std::vector<EquilibriumResult> found;
  std::ostringstream log;
  for (const auto& seed_spec : c.seeds) {
    const FemFunction x0 = make_initial(seed_spec, p.op, c.seed, eigen);
    try {
      found.push_back(find_equilibrium(p.op, p.M(), f, x0, c.equilibrium_tol, c.equilibrium_max_iter));
      log << "seed " << seed_spec << ": converged in " << found.back().iterations << " iterations\n";
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NonConvergence) throw;
      log << "seed " << seed_spec << ": " << e.what() << '\n';
    }
  }
  const auto unique = deduplicate(std::move(found), p.M(), c.equilibrium_min_distance);
  const fs::path dir = c.output_dir;
  std::ostringstream table;
  table << "index l2 linf residual iterations min_eigenvalue stable\n";
  for (std::size_t k = 0; k < unique.size(); ++k) {
    const auto& e = unique[k];
    table << k << ' ' << format_real(std::sqrt(e.state.dot(p.M() * e.state))) << ' '
          << format_real(e.state.size() ? e.state.cwiseAbs().maxCoeff() : 0.0) << ' ' << format_real(e.residual)
          << ' ' << e.iterations << ' ' << format_real(e.min_linearized_eigenvalue) << ' '
          << (e.stable ? "stable" : "unstable") << '\n';
    write_file(dir / ("equilibrium_" + std::to_string(k) + ".txt"),
               to_text([&](std::ostream& os) { write_nodal(os, e.state); }));
  }
  write_file(dir / "equilibria.txt", table.str());
  write_file(dir / "manifest_equilibria.txt", render_manifest(c));
  out << log.str() << table.str();
  return 0;
}

int cmd_diagnose(const RunConfig& c, std::ostream& out) {
  const SuiteReport report = property_suite(c.suite, c.seed);
  const std::string text = to_text([&](std::ostream& os) { write_suite_report(os, report.rows); });
  write_file(c.output_dir / "suite_report.txt", text);
  write_file(c.output_dir / "manifest_diagnose.txt", render_manifest(c));
  out << text << (report.passed ? "all gated checks passed\n" : "gated check failure\n");
  return report.passed ? 0 : 1;
}

int cmd_plot(const RunConfig& c, std::ostream& out) {
  const fs::path csv = c.output_dir / "trajectory.csv";
  std::istringstream is(read_file(csv));
  std::string line;
  std::getline(is, line);
  if (line != "t,l2,linf,energy,lyapunov,en_residual,newton_iters")
    throw Error(ErrorKind::Io, csv.string() + ": unexpected header");
  std::vector<PlotSeries> series = {{"l2", {}, {}}, {"linf", {}, {}}, {"energy", {}, {}}, {"lyapunov", {}, {}}};
  while (std::getline(is, line)) {
    std::istringstream row(line);
    std::string cell;
    std::vector<double> v;
    while (std::getline(row, cell, ',')) v.push_back(std::strtod(cell.c_str(), nullptr));
    if (v.size() < 5) throw Error(ErrorKind::Io, csv.string() + ": short row");
    for (std::size_t k = 0; k < series.size(); ++k) {
      series[k].x.push_back(v[0]);
      series[k].y.push_back(v[k + 1]);
    }
  }
  const fs::path svg = c.output_dir / "trajectory.svg";
  write_file(svg, svg_line_panels(series, "trajectory scalars"));
  out << "wrote " << svg.string() << '\n';
  return 0;
}

}  // namespace frd
