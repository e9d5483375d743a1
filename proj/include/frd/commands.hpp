#pragma once

// Subcommands behind the frd executable. Each writes its artifacts into the
// configured run directory, prints a short summary and returns the process
// exit status (errors propagate as frd::Error; see run_guarded).

#include "frd/config.hpp"

#include <functional>
#include <iosfwd>

namespace frd {

int cmd_mesh(const RunConfig& config, std::ostream& out);
int cmd_evolve(const RunConfig& config, std::ostream& out);
int cmd_spectrum(const RunConfig& config, std::ostream& out);
int cmd_equilibria(const RunConfig& config, std::ostream& out);
/// 0 when every gated check passes, 1 otherwise.
int cmd_diagnose(const RunConfig& config, std::ostream& out);
int cmd_plot(const RunConfig& config, std::ostream& out);

/// Runs `body`, mapping frd::Error to its exit code with a one-line cause
/// on `err`.
int run_guarded(const std::function<int()>& body, std::ostream& err);

/// Eigenvector i as written by cmd_spectrum; Config error when missing.
Vector read_eigenvector(const RunConfig& config, int index, std::size_t node_count);

}  // namespace frd
