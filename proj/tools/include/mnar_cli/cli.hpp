#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mnar::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitUser = 2;

inline constexpr int kSchemaVersion = 1;

// Runs one command. `args` excludes the program name. Results go to the
// files named by the command's flags or to `out`; failures print an error
// JSON object to `out` and a one-line message to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mnar::cli
