#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace glt {

// Runs one command (args excludes the program name). Primary output goes to
// --out when given, otherwise to `out`. Failures print {"error": {...}} on
// `err` and return nonzero: 2 for usage errors, 1 otherwise.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace glt
