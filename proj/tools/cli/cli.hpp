#pragma once

#include <ostream>
#include <string>

namespace knnlab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitRuntime = 3;

/// Artifact version recorded in every manifest.
std::string version_string();

/// Parses arguments, runs one subcommand and returns the process exit status.
/// Diagnostics go to `err` as a single line.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace knnlab::cli
