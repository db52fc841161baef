#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "ipl/errors.hpp"

namespace ipl::cli {

enum Exit : int {
  kOk = 0,
  kUsage = 1,           // parse or configuration error
  kNoConvergence = 2,
  kConditionFailure = 3,
  kAuditFailure = 4,
  kHarnessAlarm = 5,
};

int exit_code(ErrorKind kind);

/// Runs `iplfit` with `args` (excluding the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ipl::cli
