#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace exitlab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumerical = 3;

/// Entry point behind the `exitlab` executable; args exclude the program name.
/// Artifacts go to output.dir as {subcommand}-{domain}-{confighash}.{csv|json}.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

std::string version();

}  // namespace exitlab::cli
