// Command-line front end. Exit codes: 0 success, 1 usage or config error,
// 2 size cap exceeded, 3 numerical validation failure.
#pragma once

#include <iosfwd>

namespace mrflearn {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitSizeCap = 2;
inline constexpr int kExitNumerical = 3;

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mrflearn
