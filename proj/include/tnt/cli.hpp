#pragma once

#include <ostream>
#include <span>
#include <string>

namespace tnt::cli {

// Entry point shared by the tnt binary and the tests. args[0] is the program
// name. Returns the process exit status: 0 success, 1 usage or config error,
// 2 runtime failure.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace tnt::cli
