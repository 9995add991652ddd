#pragma once

#include <optional>
#include <string>

#include "config.hpp"

namespace jetlag::cli {

enum ExitCode { kOk = 0, kValidationFailed = 1, kConfigError = 2, kNumericalFailure = 3 };

struct Flags {
  bool oracle_only = false;
  bool closed_form = false;
  bool compose = false;
  bool negative_control = false;
  std::optional<std::string> point;  // "t,r,phi,rdot,phidot"
};

int cmd_eval(const RunConfig& cfg, const Flags& flags);
int cmd_simulate(const RunConfig& cfg);
int cmd_resonant(const RunConfig& cfg, const Flags& flags);
int cmd_deviation(const RunConfig& cfg, const Flags& flags);
int cmd_validate(const RunConfig& cfg, const Flags& flags);
int cmd_sweep(const RunConfig& cfg);

}  // namespace jetlag::cli
