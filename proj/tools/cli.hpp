#pragma once

#include <iosfwd>

namespace entroscan::cli {

enum ExitCode : int { kSuccess = 0, kUsage = 1, kIo = 2 };

/// Runs one `entroscan` invocation; argv[0] is the program name.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace entroscan::cli
