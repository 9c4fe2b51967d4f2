#pragma once

#include "ralq/error.hpp"

#include <ostream>

namespace ralq::cli {

/// Exit codes, one per failure class.
enum ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kParse = 2,
    kAssumption = 3,
    kSingularity = 4,
    kInfeasible = 5,
    kDivergence = 6,
    kNonConvergence = 7,
    kBreakdown = 8,
};

int exit_code_for(ErrorCategory category);

/// Entry point shared by the executable and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace ralq::cli
