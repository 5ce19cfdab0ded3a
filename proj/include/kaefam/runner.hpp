#pragma once

#include "kaefam/config.hpp"
#include "kaefam/report.hpp"

#include <string>

namespace kaefam {

inline constexpr const char* kToolVersion = "kaefam 1.0.0";

// exit codes: 0 pass, 2 verification failure, 3 configuration error,
// 4 numerical failure
inline constexpr int kExitOk = 0;
inline constexpr int kExitVerificationFailure = 2;
inline constexpr int kExitConfigError = 3;
inline constexpr int kExitNumericalFailure = 4;

struct RunResult {
  ReportBundle bundle;
  int exit_code = kExitOk;
  std::string status; // one-line outcome for the console
};

/// Executes one command (solve | verify | sweep | bergman) over the whole
/// configured work set and assembles the report bundle. Per-item failures are
/// recorded as rows; the bundle is always produced.
RunResult run_experiment(const LoadedConfig& config, const std::string& command);

} // namespace kaefam
