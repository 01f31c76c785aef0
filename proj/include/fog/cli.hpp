#pragma once

#include <string>
#include <vector>

namespace fog::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;   // bad or missing configuration
inline constexpr int kExitIo = 3;       // unreadable/unwritable files or malformed data
inline constexpr int kExitRuntime = 4;  // training/metric failures on valid inputs
inline constexpr int kExitCompat = 5;   // checkpoint/config incompatibility

/// Full command-line entry point (synth / train / eval / predict / inspect).
/// Returns the process exit code; never throws.
int run(int argc, const char* const* argv);

/// Convenience overload for in-process use; `args` excludes argv[0].
int run(const std::vector<std::string>& args);

}  // namespace fog::cli
