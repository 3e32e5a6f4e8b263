#pragma once

#include "osqc/io.hpp"

namespace osqc::cli {

// Executes a parsed scenario: runs the protocol / sweep / threshold / suites,
// writes the artifacts under config.out_dir and prints a one-line summary per
// task. Returns the process exit status (0 success, 2 internal error; a
// protocol abort is data, not a failure).
int execute(const ScenarioConfig& config);

// Full command-line entry point (flag parsing plus execute).
// Exit codes: 0 success, 1 config error, 2 internal error.
int run(int argc, const char* const* argv);

}  // namespace osqc::cli
