#pragma once

#include <iostream>
#include <optional>
#include <string>

#include "gradhom/config.hpp"

namespace gradhom {

enum class LogLevel { Quiet, Info, Debug };

/// Parses quiet | info | debug.
LogLevel parse_log_level(const std::string& s);

struct RunOptions {
  std::optional<int> threads;           // RVE worker threads, default 1
  std::optional<std::string> out_dir;   // overrides output.directory
  LogLevel log = LogLevel::Info;
  std::ostream* out = &std::cout;       // pass/fail matrix and summaries
  std::ostream* err = &std::cerr;       // progress log
};

/// Runs command (rve | two-scale | verify).  Returns 0 on success and 1 when a
/// verify check fails.  ValidationError and SolverError propagate.
int run(const std::string& command, const RunConfig& cfg, const RunOptions& opt = {});

}  // namespace gradhom
