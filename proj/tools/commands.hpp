#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mfswitch::cli {

/// Exit codes of the tool.
enum ExitCode : int { kOk = 0, kAssertionFailed = 1, kConfigError = 2 };

/// Runs one invocation; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mfswitch::cli
