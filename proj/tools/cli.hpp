#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace e2h::cli {

/// Runs the command line `args` (without the program name). Returns the
/// process exit code: 0 success, 1 property failure, 2 usage or parameter error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int main(int argc, char** argv);

}  // namespace e2h::cli
