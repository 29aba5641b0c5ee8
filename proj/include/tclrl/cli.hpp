#pragma once

#include <iosfwd>

namespace tclrl {

/// Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.
int run_cli(int argc, char** argv);

/// Quick gradient and physics checks; prints one line per check. Returns true if all pass.
bool run_selftest(std::ostream& out);

}  // namespace tclrl
