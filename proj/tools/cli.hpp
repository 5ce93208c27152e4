#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hotelalign::cli {

enum ExitCode : int {
    kOk = 0,
    kRuntimeError = 1,
    kUsageError = 2,
    kCheckFailure = 3,
};

// Runs one invocation. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hotelalign::cli
