#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace discursive::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Runs one subcommand. `args` excludes the program name. Returns the process
/// exit status: 0 on success, a module-specific code on failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace discursive::cli
