#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace otecon::cli {

/// Full command-line entry point, stream-injectable for tests. Returns the
/// process exit code: 0 solved, 1 solver-level failure (diagnostic document
/// on out), 2 malformed input or usage (message on err).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace otecon::cli
