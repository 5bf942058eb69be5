#pragma once

#include <iosfwd>

namespace loadgen {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitVerifyFailed = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitPort = 3;
inline constexpr int kExitBind = 4;

/// Entry point for the `loadgen` tool: plan, generate, analyze, serve.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace loadgen
