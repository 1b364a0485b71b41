#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace wrag {

// Entry point of the `wrag` tool. Returns 0 on success, 1 on a domain error
// and 2 on a usage error. Results go to `out`, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace wrag
