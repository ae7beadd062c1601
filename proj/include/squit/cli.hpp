#pragma once

#include <iosfwd>

namespace squit {

// Exit status: 0 success, 1 validation or usage error, 2 I/O error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace squit
