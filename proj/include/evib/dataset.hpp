#pragma once

#include <filesystem>
#include <vector>

#include "evib/plant.hpp"
#include "evib/preprocess.hpp"

namespace evib {

/// Directory for one trial: root/P<participant>/v<speed>/f<force>/freq<hz>.
/// Numbers are rendered with %g so the layout is stable and human-readable.
std::filesystem::path trial_dir(const std::filesystem::path& root, int participant,
                                const TrialProtocol& proto);

/// Writes every channel as raw f64 with a JSON sidecar, the 60 Hz position
/// track as position.csv, and the protocol/seed/ground truth as meta.json.
/// Creates the directory if needed; overwrites byte-identically on re-runs.
void write_trial(const TrialRecord& rec, const std::filesystem::path& dir);

/// Inverse of write_trial. Throws DataError on missing or inconsistent files.
TrialRecord read_trial(const std::filesystem::path& dir);

/// All trial directories (those holding a meta.json) under root, sorted by
/// path so traversal order is deterministic.
std::vector<std::filesystem::path> list_trials(const std::filesystem::path& root);

/// CSV schema: freq_hz,re,im,sweep,speed_mm_s,force_n,participant.
void write_frf_points_csv(const FrfPointSet& points, const std::filesystem::path& path);
FrfPointSet read_frf_points_csv(const std::filesystem::path& path);

/// Full plant configuration as strict JSON (unknown fields rejected).
void write_plant_config_json(const PlantConfig& cfg, const std::filesystem::path& path);
PlantConfig read_plant_config_json(const std::filesystem::path& path);

}  // namespace evib
