#pragma once

// Command dispatch for the berwald tool: each command reads a Config and
// writes one artifact into the output directory.

#include <filesystem>
#include <iosfwd>
#include <string>

#include "berwald/config.hpp"

namespace berwald {

inline constexpr const char* kToolName = "berwald";
inline constexpr const char* kToolVersion = "0.1.0";

inline constexpr int kExitPass = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitFail = 2;

// Conservation of L along the configured geodesic, relative drift.
inline constexpr double kConservationTol = 1e-8;

// classify -> report.json, construct -> model.json, verify -> verification.json,
// geodesic -> trajectory.csv, curvature -> curvature_grid.csv. Diagnostics and
// timings go to `log`; the artifacts depend only on the config.
int run(const std::string& command, const Config& cfg, const std::filesystem::path& out_dir,
        std::ostream& log);

}  // namespace berwald
