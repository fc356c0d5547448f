// cli.hpp — lindblad-resign command-line front end.
//
// Subcommands: synthesize, verify, simulate, demo-jc, models.
// Exit codes: 0 success, 1 usage or parse error (including grid mismatch),
// 2 synthesis infeasibility (SingularRate, InfeasibleTrace, tracking or frame
// failures), 3 verification failure.

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace resign::cli {

enum ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kSynthesisFailure = 2,
    kVerificationFailure = 3,
};

/// Runs the tool with `args` (program name excluded), writing human-readable
/// messages to `out` and diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace resign::cli
