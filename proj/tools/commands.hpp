#pragma once

#include <CLI11.hpp>

namespace drlp::cli {

// Exit codes
constexpr int kOk = 0;
constexpr int kIoError = 1;
constexpr int kUnbounded = 2;
constexpr int kNonRegular = 3;
constexpr int kStepLimit = 4;
constexpr int kCheckFailed = 5;

// Registers all subcommands; the chosen one stores its exit code in `exit_code`.
void register_commands(CLI::App& app, int& exit_code);

}  // namespace drlp::cli
