// frd: command-line front end.
//
//   frd <command> [config.ini] [--set section.key=value ...]
//
// FRD_THREADS caps the worker threads used by the property suite.

#include "frd/commands.hpp"
#include "frd/error.hpp"

#include "CLI11.hpp"

#include <iostream>

namespace {

struct Invocation {
  std::string config_path;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* sub, Invocation& inv) {
  sub->add_option("config", inv.config_path, "run configuration (key = value sections)");
  sub->add_option("--set", inv.overrides, "override one key, e.g. --set time.dt=0.01")->take_all();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reaction-diffusion with nonlocal Robin boundary conditions on rough domains"};
  app.require_subcommand(1);
  Invocation inv;
  int k = 0;

  using Command = int (*)(const frd::RunConfig&, std::ostream&);
  const std::vector<std::tuple<const char*, const char*, Command>> commands = {
      {"mesh", "build the polygon, boundary measure and mesh", frd::cmd_mesh},
      {"evolve", "integrate in time and write the trajectory", frd::cmd_evolve},
      {"spectrum", "smallest eigenpairs and the positivity report", frd::cmd_spectrum},
      {"equilibria", "Newton equilibria from the configured seeds", frd::cmd_equilibria},
      {"diagnose", "run the property suite", frd::cmd_diagnose},
      {"plot", "SVG panels of the trajectory scalars", frd::cmd_plot},
  };
  for (const auto& [name, help, fn] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    add_common(sub, inv);
    if (std::string(name) == "spectrum") sub->add_option("--k", k, "number of eigenpairs (overrides spectrum.k)");
  }
  CLI::App* schema = app.add_subcommand("schema", "list every configuration key with its default");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (schema->parsed()) {
    for (const auto& key : frd::config_schema())
      std::cout << key.name << " = " << key.default_value << "    ; " << key.help << '\n';
    return 0;
  }

  return frd::run_guarded(
      [&] {
        if (k > 0) inv.overrides.push_back("spectrum.k=" + std::to_string(k));
        const frd::RunConfig cfg = inv.config_path.empty() ? frd::parse_config("", inv.overrides)
                                                           : frd::load_config(inv.config_path, inv.overrides);
        for (const auto& [name, help, fn] : commands)
          if (app.got_subcommand(name)) return fn(cfg, std::cout);
        return 2;
      },
      std::cerr);
}
