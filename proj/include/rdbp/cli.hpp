#pragma once

#include <ostream>

namespace rdbp {

enum ExitCode : int {
    kExitOk = 0,
    kExitViolations = 1,  // validate found problems
    kExitConfigError = 2,
    kExitDomainSignal = 3,  // valid but degenerate result, e.g. no tau because r > m mu
};

/// Entry point of the command-line tool; argv[0] is the program name.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rdbp
