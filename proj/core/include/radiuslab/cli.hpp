// radius-lab: command-line entry point (subcommand dispatch)
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace radiuslab::cli {

/// Runs one command (radii, scan, convexity, gulliver-build,
/// gulliver-certify, ratio, trace). Writes the JSON report to --out or the
/// given stream. Exit status: 0 success, 1 computation error (report still
/// written with the error embedded), 2 invalid input.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace radiuslab::cli
