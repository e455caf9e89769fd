#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lipkernel {

// Command-line driver. Subcommands: gen-data, train, attack, certify,
// scatter, spectrum, lipschitz. Every run writes a JSON report (to --out or
// stdout) echoing the resolved configuration.
// Exit codes: 0 success, 1 non-convergence or failed check, 2 configuration error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
// Arguments without the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lipkernel
