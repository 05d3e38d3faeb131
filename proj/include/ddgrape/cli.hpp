#pragma once

#include <iosfwd>

namespace ddgrape {

/// Exit codes: 0 success, 1 usage error, 2 numerical or validation failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ddgrape
