#pragma once

#include <iosfwd>

namespace ua::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUser = 1;
inline constexpr int kExitInternal = 2;

// Parses argv and runs one subcommand. Returns 0 on success, 1 on a usage
// or input error, 2 on an internal failure.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ua::cli
