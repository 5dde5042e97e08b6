#pragma once

#include <ostream>

namespace consensus_lab {

/// Entry point of the consensus-lab tool. Returns 0 on success, 1 when a
/// checked property fails (or a run times out), 2 on a usage or input error.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace consensus_lab
