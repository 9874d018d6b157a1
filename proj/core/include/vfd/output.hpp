#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "vfd/config.hpp"
#include "vfd/experiments.hpp"
#include "vfd/green.hpp"
#include "vfd/profile.hpp"
#include "vfd/solver.hpp"

namespace vfd {

/// Shortest exact decimal form used in every CSV cell (17 significant
/// digits), so identical runs are byte-identical.
std::string format_number(double v);

// CSV emitters. All throw vfd::Error on I/O failure.
void write_profile_csv(const std::filesystem::path& path, const ProfileCurve& curve);
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj);
void write_ledger_csv(const std::filesystem::path& path, const Trajectory& traj);
void write_kernel_csv(const std::filesystem::path& path, const GreenOperator& op);
void write_dk_csv(const std::filesystem::path& path, const ConvergenceReport& report);
void write_mass_csv(const std::filesystem::path& path, const MassLawResult& mass);
void write_slope_csv(const std::filesystem::path& path, const SlopeResult& slope);

// JSON documents, returned as serialized text (two-space indent).
std::string profile_metadata_json(const ProfileCurve& curve, const ProfileMass& mass);
std::string convergence_report_json(const ConvergenceReport& report,
                                    const ExperimentConfig& cfg);
std::string compare_report_json(const CompareResult& result, const ExperimentConfig& cfg);
std::string extinction_report_json(const ExtinctionResult& result, const ExperimentConfig& cfg);

void write_text(const std::filesystem::path& path, const std::string& text);

/// manifest.json: config hash, every tolerance in force, per-check rows and
/// the overall verdict. Returns overall pass.
bool write_manifest(const std::filesystem::path& path, const std::string& config_hash_hex,
                    const std::map<std::string, double>& tolerances,
                    const std::vector<CheckResult>& checks);

std::map<std::string, double> tolerance_map(const Tolerances& tol);

} // namespace vfd
