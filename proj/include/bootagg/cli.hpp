#pragma once

namespace bootagg {

// Full command-line entry point: parses argv, dispatches to the subcommands
// (run / aggregate / coverage / simulate) and maps exceptions to exit codes:
// 1 config, 2 renderer protocol, 3 I/O.
int run_cli(int argc, char** argv);

}  // namespace bootagg
