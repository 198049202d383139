#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace omwu::cli {

/// Entry point shared by the omwu binary and the tests. Returns the process
/// exit code: 0 on success, 1 on a runtime error, CLI11's code on a usage
/// error. Diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace omwu::cli
