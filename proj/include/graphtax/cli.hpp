#pragma once

#include <string>
#include <vector>

namespace graphtax {

// Whole CLI, callable in-process (determinism tests drive it directly).
// Exit codes: 0 success, 1 input/usage error, 2 runtime or numeric error.
int cli_main(const std::vector<std::string>& args);

}  // namespace graphtax
