#pragma once

#include <ostream>

namespace krein {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitValidation = 2, kExitNumerical = 3 };

/// Runs one `krein` subcommand. Results go to --out (written atomically) or
/// to `out`; diagnostics go to `err`.
int run_command(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace krein
