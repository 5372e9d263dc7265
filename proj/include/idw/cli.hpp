#pragma once

#include <iosfwd>

namespace idw::cli {

// Exit codes: 0 success, 1 I/O failure, 2 usage or legality error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitIo = 1;
inline constexpr int kExitUsage = 2;

// Entry point of the idwlayout tool. Subcommands: gen, run, bench, analyze,
// convert. `out` receives data written to "-", `err` diagnostics and the
// resolved configuration.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace idw::cli
