#pragma once

#include <iosfwd>

#include <string>
#include <vector>

#include "moire/analysis.hpp"
#include "moire/config.hpp"
#include "moire/relax.hpp"

namespace moire {

struct CommandContext {
  std::ostream* log = nullptr;  // progress messages; null when quiet
  std::ostream* out = nullptr;  // result summary; null when quiet
};

/// Exit codes shared by the subcommands.
enum ExitCode : int { kOk = 0, kConfigError = 1, kNotConverged = 2, kRowFailed = 3 };

struct SweepPointResult {
  StrainFamily family;
  int grid = 0;
  RelaxResult relax;
  std::string error;  // non-empty when the point failed
};

struct SweepResult {
  std::vector<SweepPointResult> points;
  std::vector<Table2Row> rows;
  std::vector<ScalingRow> scaling;  // twist points only
  int exit_code = kOk;
};

/// Relaxes every block (largest |parameter| first, optionally warm-started
/// along each block) and measures the Table 2 walls. Point failures are
/// recorded, not thrown.
SweepResult run_sweep(const RunConfig& cfg, const CommandContext& ctx);

/// field.bin, energy.csv, trace.csv and, with analysis.map_resolution > 0, gsfe_map.{ppm,txt}.
int cmd_relax(const RunConfig& cfg, const CommandContext& ctx);
/// kink.csv and dwall.csv (widths, kappa, wall energy, FWHM).
int cmd_dwall(const RunConfig& cfg, const CommandContext& ctx);
/// table2.csv, scaling.csv (twist blocks), relax.csv and one profile CSV per wall.
int cmd_sweep(const RunConfig& cfg, const CommandContext& ctx);
/// gsfe_map.{ppm,txt} of a stored, freshly relaxed or rigid field.
int cmd_gsfe_map(const RunConfig& cfg, const CommandContext& ctx);

}  // namespace moire
