#include "frd/config.hpp"

#include "frd/error.hpp"
#include "frd/io.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <random>
#include <set>
#include <sstream>
#include <thread>

namespace frd {

const std::vector<ConfigKey>& config_schema() {
  static const std::vector<ConfigKey> schema = {
      {"domain.family", "square", "square | koch | tree | cusp"},
      {"domain.generation", "2", "prefractal generation (koch, tree)"},
      {"domain.side", "1", "side length (square, koch) or dilation factor (tree)"},
      {"domain.koch_cap", "7", "largest Koch generation accepted"},
      {"domain.tree_a", "0.6", "tree contraction ratio"},
      {"domain.tree_alpha", "1.2", "tree horizontal offset"},
      {"domain.tree_beta", "1.6", "tree vertical offset"},
      {"domain.tree_theta", "0.8", "tree branch angle in radians"},
      {"domain.cusp_gamma", "0.5", "cusp Hoelder exponent in (0,1)"},
      {"domain.cusp_length", "1", "cusp height"},
      {"domain.cusp_l", "1", "cusp width scale"},
      {"domain.cusp_segments", "16", "samples per cusp side (>= 4)"},
      {"mesh.refine", "2", "uniform red refinement levels"},
      {"mesh.smooth", "true", "guarded Laplacian smoothing after each level"},
      {"measure.kind", "sigma", "sigma | hausdorff | mixed | dirichlet | sigma_inf_fractal | zero"},
      {"measure.total_mass", "1", "mass of the Hausdorff part"},
      {"measure.smooth_scale", "1", "arclength multiplier on smooth edges (mixed)"},
      {"measure.normalize", "true", "normalize the Hausdorff part to total_mass"},
      {"measure.lumped", "false", "lump the boundary mass matrix"},
      {"form.s", "0.5", "nonlocal exponent in (0,1)"},
      {"form.eta", "0.5", "near-diagonal cutoff factor"},
      {"form.nonlocal", "true", "include the nonlocal boundary term"},
      {"form.lumped_mass", "false", "lump the interior mass matrix"},
      {"nonlinearity.name", "chaffee_infante", "zero | chaffee_infante | cubic_plus | linear"},
      {"nonlinearity.kappa", "1", "coefficient of the linear nonlinearity"},
      {"time.scheme", "imex", "imex | implicit"},
      {"time.dt", "auto", "time step, or auto for 0.1 / lambda_max"},
      {"time.final_time", "1", "final time T"},
      {"time.snapshot_stride", "10", "steps between stored snapshots (0: first and last)"},
      {"time.newton_tol", "1e-10", "implicit-step Newton tolerance"},
      {"time.newton_max_iter", "50", "implicit-step Newton iteration cap"},
      {"time.blowup_threshold", "1e6", "abort when the sup norm exceeds this"},
      {"time.initial", "random:1", "zero | const:c | random:amp | eig:i[:scale] | file:path"},
      {"spectrum.k", "6", "number of eigenpairs"},
      {"spectrum.method", "auto", "auto | dense | shift_invert"},
      {"equilibria.seeds", "zero,eig:1,eig:1:-1", "comma-separated initializers"},
      {"equilibria.tol", "1e-10", "Newton residual tolerance"},
      {"equilibria.max_iter", "100", "Newton iteration cap"},
      {"equilibria.min_distance", "1e-4", "L2 distance below which states coincide"},
      {"output.dir", "run", "run directory"},
      {"run.seed", "1", "seed for random initializers"},
      {"suite.domains", "square,koch,tree", "domain families of the property matrix"},
      {"suite.measures", "sigma,hausdorff,dirichlet", "measure kinds of the property matrix"},
      {"suite.s_values", "0.25,0.5,0.75", "nonlocal exponents of the property matrix"},
      {"suite.koch_generation", "2", "Koch generation in the property matrix"},
      {"suite.tree_generation", "3", "tree generation in the property matrix"},
      {"suite.refine", "1", "refinement levels in the property matrix"},
      {"suite.steps", "40", "time steps per dynamic check"},
      {"suite.dt", "0.01", "time step of dynamic checks"},
      {"suite.seeds", "4", "random initial states per dynamic check"},
      {"suite.mazya_samples", "200", "random functions per Maz'ya ratio estimate"},
  };
  return schema;
}

namespace {

[[noreturn]] void bad(const std::string& key, const std::string& why) {
  throw Error(ErrorKind::Config, key + ": " + why);
}

double to_real(const std::string& key, const std::string& v) {
  errno = 0;
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE || !std::isfinite(x))
    bad(key, "expected a real number, got '" + v + "'");
  return x;
}

long long to_integer(const std::string& key, const std::string& v) {
  errno = 0;
  char* end = nullptr;
  const long long x = std::strtoll(v.c_str(), &end, 10);
  if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE) bad(key, "expected an integer, got '" + v + "'");
  return x;
}

int to_int(const std::string& key, const std::string& v) {
  const long long x = to_integer(key, v);
  if (x < -1000000000LL || x > 1000000000LL) bad(key, "integer out of range");
  return static_cast<int>(x);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  bad(key, "expected true or false, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(v);
  while (std::getline(is, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

template <class F>
auto field(const std::string& key, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.detail().rfind(key, 0) == 0) throw;
    bad(key, e.detail());
  }
}

EigenMethod parse_eigen_method(const std::string& key, const std::string& v) {
  if (v == "auto") return EigenMethod::Auto;
  if (v == "dense") return EigenMethod::Dense;
  if (v == "shift_invert") return EigenMethod::ShiftInvert;
  bad(key, "unknown method '" + v + "'");
}

void require(bool ok, const std::string& key, const std::string& why) {
  if (!ok) bad(key, why);
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::vector<std::string>& overrides) {
  // ini_parser knows ';' comments only; drop '#' lines too.
  std::string cleaned;
  {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
      const auto b = line.find_first_not_of(" \t\r");
      if (b != std::string::npos && line[b] == '#') continue;
      cleaned += line + '\n';
    }
  }
  boost::property_tree::ptree tree;
  try {
    std::istringstream in(cleaned);
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw Error(ErrorKind::Config, std::string("config syntax: ") + e.what());
  }

  std::set<std::string> known;
  for (const auto& k : config_schema()) known.insert(k.name);
  RunConfig cfg;
  for (const auto& k : config_schema()) cfg.resolved[k.name] = k.default_value;
  std::set<std::string> sections;
  for (const auto& k : config_schema()) sections.insert(k.name.substr(0, k.name.find('.')));
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) bad(section, "key outside any section");
    if (!sections.count(section)) bad("[" + section + "]", "unknown section");
    for (const auto& [key, value] : body) {
      const std::string name = section + "." + key;
      if (!known.count(name)) bad(name, "unknown key");
      cfg.resolved[name] = value.get_value<std::string>();
    }
  }
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) bad(o, "override must look like section.key=value");
    auto trim = [](std::string x) {
      const auto b = x.find_first_not_of(" \t"), e = x.find_last_not_of(" \t");
      return b == std::string::npos ? std::string() : x.substr(b, e - b + 1);
    };
    const std::string name = trim(o.substr(0, eq));
    if (!known.count(name)) bad(name, "unknown key");
    cfg.resolved[name] = trim(o.substr(eq + 1));
  }
  const auto& r = cfg.resolved;
  auto get = [&](const std::string& k) -> const std::string& { return r.at(k); };

  auto& d = cfg.problem.domain;
  d.family = field("domain.family", [&] { return parse_domain_family(get("domain.family")); });
  d.generation = to_int("domain.generation", get("domain.generation"));
  require(d.generation >= 0, "domain.generation", "must be >= 0");
  d.side = to_real("domain.side", get("domain.side"));
  require(d.side > 0, "domain.side", "must be > 0");
  d.koch_cap = to_int("domain.koch_cap", get("domain.koch_cap"));
  d.tree.a = to_real("domain.tree_a", get("domain.tree_a"));
  d.tree.alpha = to_real("domain.tree_alpha", get("domain.tree_alpha"));
  d.tree.beta = to_real("domain.tree_beta", get("domain.tree_beta"));
  d.tree.theta = to_real("domain.tree_theta", get("domain.tree_theta"));
  d.cusp_gamma = to_real("domain.cusp_gamma", get("domain.cusp_gamma"));
  d.cusp_length = to_real("domain.cusp_length", get("domain.cusp_length"));
  require(d.cusp_length > 0, "domain.cusp_length", "must be > 0");
  d.cusp_l = to_real("domain.cusp_l", get("domain.cusp_l"));
  require(d.cusp_l > 0, "domain.cusp_l", "must be > 0");
  d.cusp_segments = to_int("domain.cusp_segments", get("domain.cusp_segments"));

  auto& p = cfg.problem;
  p.refine = to_int("mesh.refine", get("mesh.refine"));
  require(p.refine >= 0, "mesh.refine", "must be >= 0");
  p.smooth = to_bool("mesh.smooth", get("mesh.smooth"));
  p.measure = field("measure.kind", [&] { return parse_measure_kind(get("measure.kind")); });
  p.measure_options.total_mass = to_real("measure.total_mass", get("measure.total_mass"));
  p.measure_options.smooth_scale = to_real("measure.smooth_scale", get("measure.smooth_scale"));
  p.measure_options.normalize = to_bool("measure.normalize", get("measure.normalize"));
  if (p.measure == MeasureKind::Hausdorff || p.measure == MeasureKind::Mixed)
    require(p.measure_options.total_mass > 0, "measure.total_mass", "must be > 0");
  require(p.measure_options.smooth_scale >= 0, "measure.smooth_scale", "must be >= 0");
  p.lumped_boundary = to_bool("measure.lumped", get("measure.lumped"));
  p.s = to_real("form.s", get("form.s"));
  require(p.s > 0 && p.s < 1, "form.s", "must lie in (0, 1)");
  p.eta = to_real("form.eta", get("form.eta"));
  require(p.eta > 0, "form.eta", "must be > 0");
  p.nonlocal = to_bool("form.nonlocal", get("form.nonlocal"));
  p.lumped_mass = to_bool("form.lumped_mass", get("form.lumped_mass"));

  cfg.nonlinearity = get("nonlinearity.name");
  cfg.kappa = to_real("nonlinearity.kappa", get("nonlinearity.kappa"));
  field("nonlinearity.name", [&] { return make_nonlinearity(cfg.nonlinearity, cfg.kappa); });

  cfg.scheme = field("time.scheme", [&] { return parse_scheme(get("time.scheme")); });
  if (get("time.dt") != "auto") {
    cfg.dt = to_real("time.dt", get("time.dt"));
    require(*cfg.dt > 0, "time.dt", "must be > 0");
  }
  cfg.final_time = to_real("time.final_time", get("time.final_time"));
  require(cfg.final_time > 0, "time.final_time", "must be > 0");
  if (cfg.dt) require(*cfg.dt < cfg.final_time, "time.dt", "must be smaller than time.final_time");
  cfg.snapshot_stride = to_int("time.snapshot_stride", get("time.snapshot_stride"));
  require(cfg.snapshot_stride >= 0, "time.snapshot_stride", "must be >= 0");
  cfg.newton.tol = to_real("time.newton_tol", get("time.newton_tol"));
  require(cfg.newton.tol > 0, "time.newton_tol", "must be > 0");
  cfg.newton.max_iter = to_int("time.newton_max_iter", get("time.newton_max_iter"));
  require(cfg.newton.max_iter >= 0, "time.newton_max_iter", "must be >= 0");
  cfg.blowup_threshold = to_real("time.blowup_threshold", get("time.blowup_threshold"));
  require(cfg.blowup_threshold > 0, "time.blowup_threshold", "must be > 0");
  cfg.initial = get("time.initial");

  cfg.eig_count = to_int("spectrum.k", get("spectrum.k"));
  require(cfg.eig_count >= 1, "spectrum.k", "must be >= 1");
  cfg.eig_method = parse_eigen_method("spectrum.method", get("spectrum.method"));

  cfg.seeds = split_list(get("equilibria.seeds"));
  require(!cfg.seeds.empty(), "equilibria.seeds", "needs at least one initializer");
  cfg.equilibrium_tol = to_real("equilibria.tol", get("equilibria.tol"));
  require(cfg.equilibrium_tol > 0, "equilibria.tol", "must be > 0");
  cfg.equilibrium_max_iter = to_int("equilibria.max_iter", get("equilibria.max_iter"));
  require(cfg.equilibrium_max_iter >= 0, "equilibria.max_iter", "must be >= 0");
  cfg.equilibrium_min_distance = to_real("equilibria.min_distance", get("equilibria.min_distance"));
  require(cfg.equilibrium_min_distance >= 0, "equilibria.min_distance", "must be >= 0");

  cfg.output_dir = get("output.dir");
  require(!cfg.output_dir.empty(), "output.dir", "must not be empty");
  const long long seed = to_integer("run.seed", get("run.seed"));
  require(seed >= 0, "run.seed", "must be >= 0");
  cfg.seed = static_cast<std::uint64_t>(seed);

  auto& s = cfg.suite;
  for (const auto& name : split_list(get("suite.domains")))
    s.domains.push_back(field("suite.domains", [&] { return parse_domain_family(name); }));
  for (const auto& name : split_list(get("suite.measures")))
    s.measures.push_back(field("suite.measures", [&] { return parse_measure_kind(name); }));
  for (const auto& v : split_list(get("suite.s_values"))) {
    s.s_values.push_back(to_real("suite.s_values", v));
    require(s.s_values.back() > 0 && s.s_values.back() < 1, "suite.s_values", "entries must lie in (0, 1)");
  }
  s.koch_generation = to_int("suite.koch_generation", get("suite.koch_generation"));
  s.tree_generation = to_int("suite.tree_generation", get("suite.tree_generation"));
  s.refine = to_int("suite.refine", get("suite.refine"));
  require(s.refine >= 0, "suite.refine", "must be >= 0");
  s.steps = to_int("suite.steps", get("suite.steps"));
  require(s.steps >= 2, "suite.steps", "must be >= 2");
  s.dt = to_real("suite.dt", get("suite.dt"));
  require(s.dt > 0, "suite.dt", "must be > 0");
  s.seeds = to_int("suite.seeds", get("suite.seeds"));
  require(s.seeds >= 1, "suite.seeds", "must be >= 1");
  s.mazya_samples = to_int("suite.mazya_samples", get("suite.mazya_samples"));
  require(s.mazya_samples >= 1, "suite.mazya_samples", "must be >= 1");
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  return parse_config(read_file(path), overrides);
}

std::string render_manifest(const RunConfig& config, const std::map<std::string, std::string>& extra) {
  std::map<std::string, std::string> all = config.resolved;
  for (const auto& [k, v] : extra) all[k] = v;
  std::string out;
  for (const auto& [k, v] : all) out += k + " = " + v + '\n';
  return out;
}

unsigned thread_cap() {
  if (const char* env = std::getenv("FRD_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && n >= 1) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

FemFunction make_initial(const std::string& spec, const AssembledOperator& op, std::uint64_t seed,
                         const EigenProvider& eigen) {
  const auto n = static_cast<Eigen::Index>(op.node_count());
  const auto colon = spec.find(':');
  const std::string head = spec.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
  const std::string key = "initializer '" + spec + "'";
  FemFunction u;
  if (head == "zero" && colon == std::string::npos) {
    u = Vector::Zero(n);
  } else if (head == "const") {
    u = Vector::Constant(n, to_real(key, arg));
  } else if (head == "random") {
    const double amp = to_real(key, arg);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-amp, amp);
    u.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) u[i] = uni(rng);
  } else if (head == "eig") {
    const auto c2 = arg.find(':');
    const int index = to_int(key, arg.substr(0, c2));
    const double scale = c2 == std::string::npos ? 1.0 : to_real(key, arg.substr(c2 + 1));
    if (index < 1) bad(key, "eigenvector index starts at 1");
    if (!eigen) bad(key, "no spectrum available for eig initializers");
    u = scale * eigen(index);
    if (u.size() != n) bad(key, "eigenvector size does not match the mesh");
  } else if (head == "file") {
    std::istringstream is(read_file(arg));
    u = read_nodal(is);
    if (u.size() != n) bad(key, "file holds " + std::to_string(u.size()) + " values, mesh has " + std::to_string(n));
  } else {
    bad(key, "unknown initializer");
  }
  for (int node : op.dirichlet_nodes()) u[node] = 0.0;
  return u;
}

}  // namespace frd
