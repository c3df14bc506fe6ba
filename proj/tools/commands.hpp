#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace pgcl::cli {

// Exit codes: 0 success, 1 error or failed check, 2 result from a truncated
// chain (still a valid lower bound).
inline constexpr int kOk = 0;
inline constexpr int kError = 1;
inline constexpr int kTruncated = 2;

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pgcl::cli
