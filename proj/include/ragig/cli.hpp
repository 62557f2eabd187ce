#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ragig::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDataError = 1;
inline constexpr int kExitEnvironmentError = 2;

/// Entry point shared by the `ragig` binary and the tests. `args[0]` is the
/// program name. Subcommands: evaluate, parse, correlate, reward, render,
/// serve-reward.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ragig::cli
