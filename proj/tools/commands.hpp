#pragma once

#include <string>

#include "config.hpp"

namespace rtspec {

// Exit statuses shared by the CLI and the command runners.
inline constexpr int kExitOk = 0;
inline constexpr int kExitBadConfig = 1;
inline constexpr int kExitValidationFailed = 2;
inline constexpr int kExitSolverFailure = 3;

// Runs one command with a resolved config; writes CSV artifacts plus
// manifest.json into cfg.output_dir. Returns a process exit status.
int run_command(const std::string& command, const RunConfig& cfg);

// Convenience wrapper: load config from path, apply out/workers overrides,
// run, map ConfigError to kExitBadConfig. Used by main() and by tests.
int run_cli(const std::string& command, const std::string& config_path,
            const std::string& out_override, int workers_override,
            std::string* error_message = nullptr);

}  // namespace rtspec
