#pragma once

#include <string>
#include <vector>

namespace riskdiv::cli {

// Exit codes: 0 success, 2 bad input or configuration, 3 a broken internal guarantee.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitInvariant = 3;

int run(int argc, char** argv);
// args excludes the program name.
int run(const std::vector<std::string>& args);

}  // namespace riskdiv::cli
