#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace harvest::cli {

/// Runs one operator command. Returns the process exit code: 0 on success,
/// 1 on a runtime error, 2 on a usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace harvest::cli
