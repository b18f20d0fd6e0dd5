#pragma once

#include <iosfwd>

namespace adkit {

/// Exit codes: 0 success, 1 invalid input, 2 numerical failure, 64 usage.
int cli_dispatch(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace adkit
