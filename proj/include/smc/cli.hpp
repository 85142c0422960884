#pragma once

namespace smc {

/// Entry point of the `smc` command line tool. Subcommands: generate, solve,
/// grid, compare, remark. Exit codes: 0 success, 1 parameter error, 2 runtime failure.
int cli_main(int argc, char** argv);

}  // namespace smc
