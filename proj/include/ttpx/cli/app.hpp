#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace ttpx::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitPartial = 1;
inline constexpr int kExitConfig = 2;

// Commands: catalog check | memory init|update|forget|inspect | extract | evaluate.
// Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
// Arguments without the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace ttpx::cli
