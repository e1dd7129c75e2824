#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sgforge::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Runs one command line (args excludes the program name). "-" as a path
/// means `in` for inputs and `out` for outputs.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace sgforge::cli
