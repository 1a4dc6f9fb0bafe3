#pragma once

namespace capmsize {

// Full command-line entry point; returns the process exit code
// (0 success, 1 computation failure, 2 bad input).
int run_cli(int argc, char** argv);

}  // namespace capmsize
