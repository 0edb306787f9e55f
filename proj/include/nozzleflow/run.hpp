#pragma once

#include <string>

#include "nozzleflow/run_config.hpp"

namespace nozzleflow {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitNoConvergence = 2;
inline constexpr int kExitMarginViolated = 3;

// Orchestration entry points; artifacts land under cfg.output_dir. Failures
// map to exit codes with a human-readable cause on standard error.
int run_farfield(const RunConfig& cfg);
int run_solve(const RunConfig& cfg);
int run_diagnose(const RunConfig& cfg);
int run_critical(const RunConfig& cfg);
int run_sweep(const RunConfig& cfg);

int run_subcommand(const std::string& cmd, const RunConfig& cfg);

}  // namespace nozzleflow
