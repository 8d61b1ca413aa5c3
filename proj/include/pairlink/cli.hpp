#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pairlink::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;    // bad arguments, config or input files
inline constexpr int kExitNumeric = 3;  // non-convergence, undefined result

int run(int argc, char** argv, std::ostream& out, std::ostream& err);

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pairlink::cli
