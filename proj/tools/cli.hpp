#pragma once

#include <ostream>
#include <string>

namespace projdyn::cli {

enum ExitCode : int { kPass = 0, kFail = 1, kParseError = 2, kInconclusive = 3 };

/// Runs the command line; returns the exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Directory holding the bundled example files.
std::string data_dir();

}  // namespace projdyn::cli
