#pragma once

#include <iostream>
#include <string>
#include <vector>

namespace nsim {

// Subcommands: generate | run | oracle | report. Returns the process exit
// status; diagnostics go to `err`.
int run_cli(std::vector<std::string> args, std::ostream& out = std::cout,
            std::ostream& err = std::cerr);

}  // namespace nsim
