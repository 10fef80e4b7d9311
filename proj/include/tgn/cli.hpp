#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tgn {

/// Command-line front end, shared by the binary and the tests. `args` is the
/// argument list without the program name. Returns the process exit code:
/// 0 on success, 1 for usage and configuration problems, 2 for runtime
/// failures (I/O, non-finite numbers, failed checks).
int run_cli(std::vector<std::string> args, std::ostream& out,
            std::ostream& err);

}  // namespace tgn
