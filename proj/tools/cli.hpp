#pragma once

#include <iosfwd>

namespace unitcarve::cli {

// Exit codes: 0 success, 1 usage error or unreadable/malformed file,
// 2 program parse error, 3 `run` ended in a trap or hit the step limit.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace unitcarve::cli
