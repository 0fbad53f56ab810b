#pragma once

#include <iosfwd>

namespace semret {

/// Entry point of the `semret` tool. Returns 0 on success, 1 on an
/// operational failure and 2 on a usage error.
int cli_main(int argc, const char* const* argv);
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace semret
