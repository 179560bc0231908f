#pragma once

#include <iosfwd>

namespace netreduce {

/// Entry point of the command-line tool. Returns 0 on success, 1 on runtime
/// failure and 2 on usage errors.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace netreduce
