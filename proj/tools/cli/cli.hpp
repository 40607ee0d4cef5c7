#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace greenevo::cli {

enum ExitCode : int { ok = 0, config_error = 2, data_error = 3, runtime_failure = 4 };

/// Environment variable that, when set, prefixes relative output directories.
inline constexpr const char* kOutputRootEnv = "GREENEVO_OUTPUT_ROOT";

/// Entry point behind the `greenevo` executable. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace greenevo::cli
