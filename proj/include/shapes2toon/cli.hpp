#pragma once

#include <string>
#include <vector>

namespace s2t::cli {

// Exit codes: 0 success, 1 validation error or bad usage, 2 I/O error.
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);

}  // namespace s2t::cli
