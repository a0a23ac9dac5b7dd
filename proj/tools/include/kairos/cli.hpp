#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace kairos {

/// Entry point of the `kairos` tool. args[0] is the program name. Returns the
/// process exit code; errors go to `err` as one JSON object.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace kairos
