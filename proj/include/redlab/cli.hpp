#pragma once

#include <string>
#include <vector>

namespace redlab::cli {

/// Entry point behind the redlab binary; also callable from tests.
/// Exit codes: 0 success, 2 validation error, 3 infeasible or unstable.
int run(const std::vector<std::string>& args);
int run(int argc, const char* const* argv);

}  // namespace redlab::cli
