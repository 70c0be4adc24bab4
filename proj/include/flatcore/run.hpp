#pragma once

// Subcommand dispatch: maps a validated configuration onto the numerical
// modules and writes report.json, CSV curves, and binary fields.

#include <string>

#include "flatcore/config.hpp"

namespace flatcore::cli {

struct RunOptions {
    bool h_study = false;       // ground-state / lambda-star: repeat at h, h/2, h/4
    std::string out_override;   // when non-empty, replaces cfg.out_dir
};

/// Dispatches; throws ValidationError for config/subcommand mismatches and
/// numerical Error subclasses on solver failure.  All files are written
/// atomically into the output directory.
void run(const std::string& subcommand, const RunConfig& cfg, const RunOptions& opt = {});

/// Version string recorded in every report.
const char* version();

} // namespace flatcore::cli
