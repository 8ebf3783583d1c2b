#ifndef SURVEYDX_CLI_HPP
#define SURVEYDX_CLI_HPP

#include <ostream>
#include <string>
#include <vector>

namespace surveydx::cli {

// Runs one CLI invocation. args excludes the program name. Returns the exit
// code: 0 success, 2 usage error, 1 data/domain error (with a one-line JSON
// error record {code, message} on err).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Fixed float formatting rule for all emitted output: printf "%.17g"
// (17 significant digits, round-trips exactly).
std::string format_double(double v);

}  // namespace surveydx::cli

#endif  // SURVEYDX_CLI_HPP
