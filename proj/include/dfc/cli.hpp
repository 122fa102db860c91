#pragma once

#include <iosfwd>

namespace dfc {

// Entry point of the `dfc` command-line tool. Returns the process exit
// status; diagnostics go to `err`, results to `out`.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dfc
