#pragma once

#include <string>
#include <vector>

namespace wpca {

/// Entry point of the `wpca` command line tool. `args` excludes the program
/// name. Returns 0 on success, 1 on usage or input errors and 2 on
/// numerical failures.
int run_cli(const std::vector<std::string>& args);

}  // namespace wpca
