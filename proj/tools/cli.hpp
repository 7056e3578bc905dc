#pragma once

#include <iosfwd>

namespace sace::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitNoConvergence = 3;

/// Entry point shared by the `sace` binary and the tests. Messages go to
/// `out` and `err`; the return value is the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sace::cli
