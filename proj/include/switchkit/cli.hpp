#pragma once

#include "switchkit/models.hpp"
#include "switchkit/sim.hpp"

#include <ostream>
#include <string>
#include <vector>

namespace switchkit {

/// Exit codes of the command-line front end.
enum ExitCode : int {
    kExitPass = 0,
    kExitFail = 1,
    kExitUnknown = 2,
    /// Usage, model, certificate or formula parse errors.
    kExitUsage = 64,
    /// Invalid switching signal.
    kExitSignal = 65,
    /// Unsupported mechanism or unreadable input.
    kExitUnsupported = 66,
};

/// Runs one command; args excludes the program name. Reports go to out,
/// diagnostics to err.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Phase portrait (x1 against x2, or x against time for scalar systems)
/// with one stroke style per mode and green circles at switches.
std::string render_svg(const SwitchedSystem& sys, const Trajectory& traj);

} // namespace switchkit
