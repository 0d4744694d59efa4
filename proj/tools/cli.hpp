#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace provaudit::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitObfuscation = 2;

// Entry point shared by the executable and the tests. `args` excludes argv[0].
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace provaudit::cli
