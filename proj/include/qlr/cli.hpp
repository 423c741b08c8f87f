#pragma once

#include <string>
#include <vector>

namespace qlr {

// exit codes: 0 success, 2 configuration error, 3 numerical failure,
// 4 degenerate-ground-state refusal
int run_cli(const std::vector<std::string>& args);

} // namespace qlr
