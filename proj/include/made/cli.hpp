#pragma once

namespace made {

// Entry point for the command-line tool; returns the process exit code
// (0 success, 2 usage, 3 data, 4 numerical failure).
int run_cli(int argc, const char* const* argv);

}  // namespace made
