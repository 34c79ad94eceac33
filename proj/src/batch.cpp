#include "evib/batch.hpp"

#include <utility>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace evib {

namespace {

std::vector<std::pair<int, TrialProtocol>> flatten_grid(const BatchSpec& spec) {
    if (spec.speeds.empty() || spec.forces.empty() || spec.frequencies.empty())
        throw DataError("batch: grid must have at least one speed, force and frequency");
    if (spec.participants < 1) throw DataError("batch: participants must be >= 1");
    std::vector<std::pair<int, TrialProtocol>> grid;
    grid.reserve(std::size_t(spec.participants) * spec.speeds.size() * spec.forces.size() *
                 spec.frequencies.size());
    for (int p = 1; p <= spec.participants; ++p)
        for (double v : spec.speeds)
            for (double f : spec.forces)
                for (double freq : spec.frequencies) {
                    TrialProtocol proto = spec.base;
                    proto.speed_mm_s = v;
                    proto.force_n = f;
                    proto.message_freq_hz = freq;
                    grid.emplace_back(p, proto);
                }
    return grid;
}

std::filesystem::path simulate_one(const BatchSpec& spec, int participant,
                                   const TrialProtocol& proto,
                                   const std::filesystem::path& root, Warnings* warnings) {
    const std::uint64_t seed = trial_seed(spec.base_seed, participant, proto);
    TrialRecord rec = simulate_trial(spec.plant, proto, seed, warnings);
    rec.participant = participant;
    const auto dir = trial_dir(root, participant, proto);
    write_trial(rec, dir);
    return dir;
}

int effective_jobs(int jobs) {
#ifdef _OPENMP
    return jobs > 0 ? jobs : omp_get_max_threads();
#else
    (void)jobs;
    return 1;
#endif
}

}  // namespace

BatchSpec default_batch_spec() {
    BatchSpec spec;
    spec.speeds = protocol_speeds();
    spec.forces = protocol_forces();
    spec.frequencies = protocol_frequencies();
    spec.plant.setup = default_setup_model();
    return spec;
}

std::size_t batch_size(const BatchSpec& spec) {
    return std::size_t(spec.participants < 0 ? 0 : spec.participants) * spec.speeds.size() *
           spec.forces.size() * spec.frequencies.size();
}

std::vector<std::filesystem::path> run_batch_serial(const BatchSpec& spec,
                                                    const std::filesystem::path& root,
                                                    Warnings* warnings) {
    validate_plant_config(spec.plant);
    const auto grid = flatten_grid(spec);
    std::vector<std::filesystem::path> dirs(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        dirs[i] = simulate_one(spec, grid[i].first, grid[i].second, root, warnings);
    return dirs;
}

std::vector<std::filesystem::path> run_batch_parallel(const BatchSpec& spec,
                                                      const std::filesystem::path& root,
                                                      int jobs, Warnings* warnings) {
    validate_plant_config(spec.plant);
    const auto grid = flatten_grid(spec);
    std::vector<std::filesystem::path> dirs(grid.size());
    std::vector<Warnings> local(grid.size());
    std::vector<std::string> errors(grid.size());
    const int nthreads = effective_jobs(jobs);

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(nthreads)
#else
    (void)nthreads;
#endif
    for (long i = 0; i < long(grid.size()); ++i) {
        try {
            dirs[std::size_t(i)] = simulate_one(spec, grid[std::size_t(i)].first,
                                                grid[std::size_t(i)].second, root,
                                                &local[std::size_t(i)]);
        } catch (const std::exception& e) {
            errors[std::size_t(i)] = e.what();
        }
    }

    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!errors[i].empty()) throw DataError("batch trial failed: " + errors[i]);
        if (warnings)
            for (auto& msg : local[i].items) warnings->add(std::move(msg));
    }
    return dirs;
}

TrialExtraction extract_trial(const TrialRecord& trial, Warnings* warnings) {
    const Waveform friction = reduce_lateral_to_1d(trial.force_x, trial.force_y);
    const auto sweeps = detect_sweeps(friction);
    const auto windows = extract_windows(trial, sweeps, warnings);
    if (windows.empty()) throw DataError("no usable sweeps detected");
    TrialExtraction out;
    for (const auto& w : windows) {
        out.friction.entries.push_back(
            frf_point(w, trial.proto.message_freq_hz, trial.proto.carrier_hz));
        out.skin.entries.push_back(skin_point(w, trial.proto.message_freq_hz));
    }
    return out;
}

namespace {

ExtractionResult merge_extractions(const std::vector<std::filesystem::path>& dirs,
                                   std::vector<TrialExtraction>& parts,
                                   std::vector<std::string>& errors,
                                   std::vector<Warnings>& local, Warnings* warnings) {
    ExtractionResult result;
    result.n_trials = dirs.size();
    for (std::size_t i = 0; i < dirs.size(); ++i) {
        if (!errors[i].empty()) {
            result.failures.push_back(dirs[i].string() + ": " + errors[i]);
            continue;
        }
        auto& part = parts[i];
        result.friction.entries.insert(result.friction.entries.end(),
                                       part.friction.entries.begin(),
                                       part.friction.entries.end());
        result.skin.entries.insert(result.skin.entries.end(), part.skin.entries.begin(),
                                   part.skin.entries.end());
        if (warnings)
            for (auto& msg : local[i].items) warnings->add(std::move(msg));
    }
    return result;
}

}  // namespace

ExtractionResult extract_batch_serial(const std::vector<std::filesystem::path>& dirs,
                                      Warnings* warnings) {
    std::vector<TrialExtraction> parts(dirs.size());
    std::vector<std::string> errors(dirs.size());
    std::vector<Warnings> local(dirs.size());
    for (std::size_t i = 0; i < dirs.size(); ++i) {
        try {
            parts[i] = extract_trial(read_trial(dirs[i]), &local[i]);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    }
    return merge_extractions(dirs, parts, errors, local, warnings);
}

ExtractionResult extract_batch_parallel(const std::vector<std::filesystem::path>& dirs,
                                        int jobs, Warnings* warnings) {
    std::vector<TrialExtraction> parts(dirs.size());
    std::vector<std::string> errors(dirs.size());
    std::vector<Warnings> local(dirs.size());
    const int nthreads = effective_jobs(jobs);

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(nthreads)
#else
    (void)nthreads;
#endif
    for (long i = 0; i < long(dirs.size()); ++i) {
        try {
            parts[std::size_t(i)] =
                extract_trial(read_trial(dirs[std::size_t(i)]), &local[std::size_t(i)]);
        } catch (const std::exception& e) {
            errors[std::size_t(i)] = e.what();
        }
    }
    return merge_extractions(dirs, parts, errors, local, warnings);
}

}  // namespace evib
