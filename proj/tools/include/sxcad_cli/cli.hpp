#pragma once

#include <iosfwd>

namespace sxcad::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitProvider = 3;

/// Runs the command line; errors go to `err` as one JSON object.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sxcad::cli
