#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "evib/dataset.hpp"
#include "evib/plant.hpp"
#include "evib/preprocess.hpp"

namespace evib {

/// Grid of trial conditions to synthesize: the cross product of speeds,
/// forces, frequencies and participants, all sharing one plant and base
/// protocol (whose per-trial fields are overwritten from the grid).
struct BatchSpec {
    std::vector<double> speeds;
    std::vector<double> forces;
    std::vector<double> frequencies;
    int participants = 1;
    PlantConfig plant;
    TrialProtocol base;
    std::uint64_t base_seed = 1;
};

/// Canonical full protocol grid (15 x 5 x 5 per participant).
BatchSpec default_batch_spec();

std::size_t batch_size(const BatchSpec& spec);

/// Serial reference: simulates and writes every grid trial under root.
/// Returns trial directories in grid order.
std::vector<std::filesystem::path> run_batch_serial(const BatchSpec& spec,
                                                    const std::filesystem::path& root,
                                                    Warnings* warnings = nullptr);

/// OpenMP variant of run_batch_serial. Per-trial seeds derive only from trial
/// coordinates and every trial writes its own directory, so the dataset is
/// byte-identical to the serial reference for any jobs count. jobs <= 0 uses
/// the runtime default thread count.
std::vector<std::filesystem::path> run_batch_parallel(const BatchSpec& spec,
                                                      const std::filesystem::path& root,
                                                      int jobs, Warnings* warnings = nullptr);

/// One trial reduced to response points: sweep detection on the combined
/// lateral force, per-sweep windows, then one friction FRF point and one
/// skin (friction-to-velocity) point per window. Throws DataError when no
/// usable sweep survives.
struct TrialExtraction {
    FrfPointSet friction;
    FrfPointSet skin;
};
TrialExtraction extract_trial(const TrialRecord& trial, Warnings* warnings = nullptr);

/// Extraction over many trial directories. Per-trial failures are recorded as
/// "path: reason" strings instead of aborting the run; point order follows
/// directory order regardless of schedule.
struct ExtractionResult {
    FrfPointSet friction;
    FrfPointSet skin;
    std::size_t n_trials = 0;
    std::vector<std::string> failures;
};
ExtractionResult extract_batch_serial(const std::vector<std::filesystem::path>& dirs,
                                      Warnings* warnings = nullptr);
ExtractionResult extract_batch_parallel(const std::vector<std::filesystem::path>& dirs,
                                        int jobs, Warnings* warnings = nullptr);

}  // namespace evib
