#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace twinbeam::cli {

/// Exit codes of the command-line tool.
enum ExitCode : int { kSuccess = 0, kDataError = 1, kUsageError = 2 };

/// Dispatches `moments`, `calibrate`, `scan` and `simulate`. Results go to
/// files or `out`; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// argv entry point writing to std::cout / std::cerr.
int run(int argc, char** argv);

/// Long option names accepted by each subcommand (without leading dashes),
/// which are also the keys accepted in the subcommand's config-file section.
std::vector<std::string> option_names(const std::string& subcommand);

}  // namespace twinbeam::cli
