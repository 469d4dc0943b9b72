#pragma once

#include <iosfwd>

namespace glgp {

/// Entry point of the `glgp` command. Returns 0 on success, 1 on invalid input
/// or configuration, 2 on numerical failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace glgp
