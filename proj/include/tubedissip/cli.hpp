#ifndef TUBEDISSIP_CLI_HPP_
#define TUBEDISSIP_CLI_HPP_

#include <iosfwd>

namespace tubedissip {

/// Exit codes of the command-line front end.
enum ExitCode : int { kExitOk = 0, kExitDomainFailure = 1, kExitUsage = 2 };

/**
 * @brief Entry point of the `tubedissip` command.
 *
 * Subcommands: rci, eval-v, check-storage, control, sweep, simulate, verify-all.
 * Results go to `out` (or the configured output file), diagnostics to `err`.
 */
int run(int argc, const char * const * argv, std::ostream & out, std::ostream & err);

}  // namespace tubedissip

#endif  // TUBEDISSIP_CLI_HPP_
