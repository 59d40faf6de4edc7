#pragma once

#include <iosfwd>

namespace copra {

// Entry point of copra-beam. Returns the process exit status.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace copra
