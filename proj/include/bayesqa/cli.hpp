#pragma once

#include <ostream>

namespace bayesqa {

/// Entry point of the `bayesqa` command. Returns the process exit code:
/// 0 on success, 1 on a domain error, 2 on a usage error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace bayesqa
