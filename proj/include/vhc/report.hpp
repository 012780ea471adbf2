#pragma once

// Machine-readable reports (versioned JSON), their text rendering, and
// atomic file output.

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "vhc/analysis.hpp"
#include "vhc/sim.hpp"

namespace vhc {

/// Bumped whenever a field is renamed, removed or changes meaning.
inline constexpr int kReportSchemaVersion = 1;

/// NaN and infinities become null.
nlohmann::json number_json(double v);
nlohmann::json matrix_json(const Mat<double>& m);

nlohmann::json report_json(const AnalysisResult& res);
std::string report_text(const AnalysisResult& res);

struct HolonomyEntry {
  std::string tag;
  std::vector<double> base;
  Mat<double> matrix;
  double identity_defect = 0.0;  // max |P − I|
};
nlohmann::json holonomy_json(const std::string& model, const std::vector<HolonomyEntry>& loops);

nlohmann::json trajectory_json(const Trajectory& traj);
/// Summary of one simulation: energy drift, residual max, orbit class.
nlohmann::json simulation_summary_json(const std::string& model, const std::string& mode, const Trajectory& traj,
                                       const std::string& orbit_class);
nlohmann::json portrait_json(const std::string& model, const std::vector<Orbit>& orbits, std::size_t axis);

/// Write through a temporary file in the same directory and rename, so
/// readers never see a partial file. Creates missing parent directories.
void write_atomic(const std::filesystem::path& path, const std::string& content);

/// `flag` if non-empty, else $VHC_OUT_DIR, else the working directory.
std::filesystem::path output_dir(const std::string& flag);
/// True when either the flag or $VHC_OUT_DIR names a directory.
bool output_dir_configured(const std::string& flag);

inline constexpr const char* kOutDirEnv = "VHC_OUT_DIR";

}  // namespace vhc
