#pragma once

#include <string>
#include <vector>

namespace podinn {

/// Entry point shared by the binary and the tests. Exit codes: 0 success,
/// 2 usage/configuration, 3 data or schema, 4 numerical failure.
int run_cli(const std::vector<std::string>& args);

}  // namespace podinn
