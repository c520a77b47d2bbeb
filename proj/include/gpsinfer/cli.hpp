#pragma once

// Batch front end: one subcommand per pipeline stage, wired through the CSV /
// JSON / SVG formats the library modules define. Exit codes: 0 success, 1 for
// flag or input validation problems, 2 for runtime (estimation) failures.

namespace gpsinfer {

// argv follows main() conventions (argv[0] = program name). Subcommands:
// simulate | estimate-gps | pseudo-pop | balance-report | estimate-erf |
// plot-balance | plot-erf.
int run_subcommand(int argc, const char* const* argv);

}  // namespace gpsinfer
