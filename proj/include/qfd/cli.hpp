#pragma once

#include <exception>

namespace qfd {

// Stable process exit codes.
enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1,  // anything not covered below
    kExitConfig = 2,   // bad flags, bad config file, invalid values
    kExitData = 3,     // simulation divergence, unreadable or inconsistent files, shape mismatches
    kExitTraining = 4, // non-finite losses, failed runs
};

int exit_code_for(const std::exception& e);

// Entry point of the `qfd` tool.
int run_cli(int argc, char** argv);

}  // namespace qfd
