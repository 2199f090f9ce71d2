#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace panda::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitEmptyPool = 3;

/// Entry point for the `panda` binary: learn, eval, flip, episode, toy-env.
/// `args` excludes the program name. Returns the process exit code.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace panda::cli
