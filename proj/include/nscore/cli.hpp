#pragma once

#include <string>
#include <vector>

namespace nscore {

inline constexpr const char* kToolVersion = "0.1.0";

/// Exit codes: 0 success, 1 usage error, 2 data or validation error.
int run_cli(int argc, const char* const* argv);
int run_cli(const std::vector<std::string>& args);

}  // namespace nscore
