#pragma once

// Run configuration: sectioned key = value text, strict about unknown
// sections and keys. Every key has a default listed in config_schema(),
// and the manifest written next to each run lists all of them resolved.

#include "frd/evolve.hpp"
#include "frd/problem.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace frd {

struct ConfigKey {
  std::string name;  // "section.key"
  std::string default_value;
  std::string help;
};

const std::vector<ConfigKey>& config_schema();

struct SuiteSpec {
  std::vector<DomainFamily> domains;
  std::vector<MeasureKind> measures;
  std::vector<double> s_values;
  int koch_generation = 2;
  int tree_generation = 3;
  int refine = 1;
  int steps = 40;
  double dt = 0.01;
  int seeds = 4;
  int mazya_samples = 200;
};

struct RunConfig {
  ProblemSpec problem;
  std::string nonlinearity = "chaffee_infante";
  double kappa = 1.0;
  Scheme scheme = Scheme::Imex;
  std::optional<double> dt;  // empty means the power-iteration default
  double final_time = 1.0;
  int snapshot_stride = 10;
  NewtonOptions newton;
  double blowup_threshold = 1e6;
  std::string initial = "random:1";
  int eig_count = 6;
  EigenMethod eig_method = EigenMethod::Auto;
  std::vector<std::string> seeds;
  double equilibrium_tol = 1e-10;
  int equilibrium_max_iter = 100;
  double equilibrium_min_distance = 1e-4;
  std::filesystem::path output_dir = "run";
  std::uint64_t seed = 1;
  SuiteSpec suite;

  /// Every schema key with its resolved text value.
  std::map<std::string, std::string> resolved;
};

/// `overrides` are "section.key=value" strings applied after the file.
RunConfig parse_config(const std::string& text, const std::vector<std::string>& overrides = {});
RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

/// "key = value" lines, sorted by key; `extra` entries (derived values such
/// as the resolved time step) override or extend the schema keys.
std::string render_manifest(const RunConfig& config, const std::map<std::string, std::string>& extra = {});

/// Number of worker threads: FRD_THREADS if set (>= 1), else the hardware count.
unsigned thread_cap();

/// Provides M-normalized eigenvector i (1-based) for "eig:" initializers.
using EigenProvider = std::function<Vector(int)>;

/// "zero", "const:<c>", "random:<amp>", "eig:<i>[:<scale>]", "file:<path>".
/// Dirichlet nodes are set to zero in every case.
FemFunction make_initial(const std::string& spec, const AssembledOperator& op, std::uint64_t seed,
                         const EigenProvider& eigen = {});

}  // namespace frd
