#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace geognn {

/// Entry point behind the `geognn` executable. `args` excludes the program
/// name. Every failure prints one `error: <kind>: <message>` line to `err`
/// and returns nonzero (2 for usage errors, 1 otherwise).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace geognn
