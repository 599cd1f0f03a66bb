#pragma once

#include <iosfwd>

namespace ppv::cli {

/// Exit statuses.
inline constexpr int kHolds = 0;
inline constexpr int kFails = 1;
inline constexpr int kUnknown = 2;
inline constexpr int kInputError = 3;

/// Runs the command line tool; output goes to `out`, diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ppv::cli
