#pragma once

#include <chrono>
#include <string>

namespace datavideo::detail {

struct CommandResult {
    int exit_code = 0;
    bool timed_out = false;
    std::string out;
    std::string err;
};

// Runs command through /bin/sh with input on standard input. The process is
// killed once the timeout elapses.
CommandResult run_command(const std::string& command, const std::string& input, std::chrono::milliseconds timeout);

// Single-quotes text for safe interpolation into a shell command.
std::string shell_quote(const std::string& text);

}  // namespace datavideo::detail
