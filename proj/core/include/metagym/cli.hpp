#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace metagym::cli {

// Subcommands: gen, solve, verify, score, merge, stats.
// Exit codes: 0 success, 1 domain error (including an incorrect verdict
// from `verify`), 2 usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv);

} // namespace metagym::cli
