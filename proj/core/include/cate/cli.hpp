#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cate {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitDataError = 3;

// Entry point behind the `cate` executable. `args` excludes argv[0].
// Results go under the configured output directory; progress and errors go
// to `err`, summaries to `out`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cate
