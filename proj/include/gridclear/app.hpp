#pragma once

#include <ostream>

namespace gridclear {

/// Exit codes of the command-line front end.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;       // bad arguments, unreadable or invalid input, unwritable output
inline constexpr int kExitInfeasible = 2;  // ran to completion, reports written, but a clearing is infeasible

/// Entry point of the gridclear command; writes human output to out and
/// diagnostics to err.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gridclear
