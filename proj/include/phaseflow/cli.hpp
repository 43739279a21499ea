#pragma once

#include <ostream>

namespace phaseflow {

// Command line entry point. Returns 0 on success, 2 when a strict audit of a run with FE
// convection fails, 1 on errors (including usage errors, which also print the flag synopsis to err).
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace phaseflow
