#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace stokolmo {

/// Runs one command line. Exit codes: 0 success, 1 Inconclusive verdict or
/// failed verification, 2 input error (reported as one JSON object on `err`).
int run(const std::vector<std::string>& args, std::ostream& err);
int run(int argc, char** argv);

}  // namespace stokolmo
