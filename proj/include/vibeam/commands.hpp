#pragma once

#include <string>
#include <vector>

#include "vibeam/config.hpp"
#include "vibeam/fe_model.hpp"
#include "vibeam/rom.hpp"

namespace vibeam {

/// Output directory from config plus the VIBEAM_OUT_ROOT override.
std::string resolve_output_dir(const Config& cfg);

FEModel build_model_from_config(const Config& cfg);

/// reduce: model -> reduced archive + manifest (frequency table, static check).
void cmd_reduce(const Config& cfg);

/// sweep: archive -> stepped-sine result directories + summary CSVs.
void cmd_sweep(const Config& cfg);

/// converge: time-step and mode-count refinement tables.
void cmd_converge(const Config& cfg);

/// analyze: derived quantities and figure-analog files for stored series.
void cmd_analyze(const Config& cfg, const std::vector<std::string>& series_paths);

/// update: frequency-matching identification of the root layer stiffnesses.
void cmd_update(const Config& cfg);

}  // namespace vibeam
