#pragma once

namespace traject::cli {

// Exit codes shared by every subcommand.
inline constexpr int kOk = 0;
inline constexpr int kUsageError = 1;
inline constexpr int kDataError = 2;
inline constexpr int kNumericError = 3;

/// Parses argv and runs the selected subcommand; returns the process exit
/// code. Lives in the library so tests can drive the CLI in-process.
int dispatch(int argc, const char* const* argv);

}  // namespace traject::cli
