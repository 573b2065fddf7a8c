#pragma once

namespace shiftcraft {

// Process exit codes shared by every subcommand.
inline constexpr int exit_ok = 0;
inline constexpr int exit_usage = 1;
inline constexpr int exit_config = 2;
inline constexpr int exit_io = 3;
inline constexpr int exit_numeric = 4;

int run_cli(int argc, const char* const* argv);

}  // namespace shiftcraft
