#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "evib/batch.hpp"
#include "evib/empirical.hpp"
#include "evib/stats.hpp"
#include "evib/sysid.hpp"

namespace evib {

struct PipelineOptions {
    int jobs = 0;                     // <= 0: runtime default
    double fit_band_hi_hz = 750.0;    // model fits use points at or below this
    double max_fail_fraction = 0.10;  // more failed trials than this aborts
    SetupModel setup = default_setup_model();
};

/// Fits for one (participant, speed, force) grid cell: the first-order
/// friction response and the second-order skin response, each pooled over
/// that cell's sweeps and frequencies.
struct CellFit {
    int participant = 1;
    double speed_mm_s = 0.0;
    double force_n = 0.0;
    FitResult first;
    FitResult second;
};

struct PipelineResult {
    std::size_t n_trials = 0;
    std::vector<std::string> failures;  // "trial dir: reason"
    std::vector<CellFit> cells;
    EmpiricalSpeedModel model;
    std::vector<std::pair<std::string, Correlation>> correlations;
};

/// End-to-end batch analysis: extract response points from every trial under
/// dataset_root, divide out the rig coloring, fit each grid cell, regress the
/// cutoff law over speed, and correlate friction-model against skin-model
/// parameters. Writes fits.csv, empirical_model.json, correlations.csv,
/// frf_points.csv, skin_points.csv, failures.log (when any) and plotdata/
/// under out_dir. Throws DataError when the dataset is empty or too many
/// trials fail.
PipelineResult run_pipeline(const std::filesystem::path& dataset_root,
                            const std::filesystem::path& out_dir,
                            const PipelineOptions& opt = {}, Warnings* warnings = nullptr);

/// Wide per-cell table; one row per grid cell, empty fields for a model that
/// was not fit. Schema documented in FORMATS.md.
void write_fits_csv(const std::vector<CellFit>& cells, const std::filesystem::path& path);
std::vector<CellFit> read_fits_csv(const std::filesystem::path& path);

/// Correlation table across cells: each friction parameter (K, f_o) against
/// each skin parameter (m, b, k). Schema: pair,r,p,n.
std::vector<std::pair<std::string, Correlation>> correlate_cells(
    const std::vector<CellFit>& cells);
void write_correlations_csv(const std::vector<std::pair<std::string, Correlation>>& rows,
                            const std::filesystem::path& path);

/// Plot-data emission: Bode point cloud CSV, quartile tables grouped by speed
/// and by force, and a self-contained SVG scatter of the cloud.
void write_plotdata(const FrfPointSet& friction_points, const std::vector<CellFit>& cells,
                    const std::filesystem::path& dir);

/// Summary of a pipeline output directory: recovered model (with ground-truth
/// deltas when the dataset recorded them), cell counts, correlations. Missing
/// individual artifacts are listed rather than fatal; a missing directory is
/// an error. csv_format selects a fixed metric,value table.
std::string report_summary(const std::filesystem::path& out_dir, bool csv_format);

}  // namespace evib
