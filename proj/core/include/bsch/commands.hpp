#ifndef BSCH_COMMANDS_HPP
#define BSCH_COMMANDS_HPP

#include <string>

#include "bsch/config.hpp"

namespace bsch {

// Exit codes shared by the CLI: 0 ok, 1 verification failure, 2 config error,
// 3 runtime divergence.
inline constexpr int kExitOk = 0;
inline constexpr int kExitVerifyFail = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

// Time integration run: writes manifest.txt, diagnostics.csv,
// snapshots/step_%08d.csv (+ *_gamma.csv) and decay_fit.txt under out_dir.
int cmd_simulate(const RunConfig& cfg, const std::string& out_dir);

// Steady-state solve: writes manifest.txt, steady.csv and steady_report.txt.
int cmd_steady(const RunConfig& cfg, const std::string& out_dir);

// Executable checklist over the configured potential/parameters; prints one
// PASS/FAIL/SKIPPED line per named check and returns 1 on any FAIL.
int cmd_verify(const RunConfig& cfg, bool fast);

}  // namespace bsch

#endif
