#pragma once

#include <iosfwd>

namespace hacfem {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitSolverFailure = 2;
inline constexpr int kExitUsage = 64;
inline constexpr int kExitConfig = 65;

/// Subcommands: run, verify, mesh-info, homog.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int cli_main(int argc, const char* const* argv);

} // namespace hacfem
