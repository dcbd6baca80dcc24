#pragma once

#include <string>
#include <vector>

namespace formctl {

// Full command-line front end: `check`, `run`, and `metrics` subcommands.
// Takes the arguments after the program name. Returns 0 on success, 1 on
// validation or usage failure, 2 when a run aborts on agent coincidence.
int run_cli(const std::vector<std::string>& args);

}  // namespace formctl
