#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace assoclearn::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitWarning = 1;
inline constexpr int kExitInputError = 2;

/// Runs the assoclearn command line. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace assoclearn::cli
