#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hifi::cli {

enum ExitCode : int {
    exit_ok = 0,
    exit_check_failed = 1,
    exit_config_error = 2,
};

/// Runs the command line tool. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hifi::cli
