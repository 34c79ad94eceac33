#include "evib/cli_commands.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "evib/batch.hpp"
#include "evib/dataset.hpp"
#include "evib/empirical.hpp"
#include "evib/pipeline.hpp"
#include "evib/render.hpp"
#include "evib/sysid.hpp"
#include "evib/waveform_io.hpp"

namespace evib {

namespace {

using nlohmann::json;

void print_warnings(const Warnings& w) {
    for (const auto& msg : w.items) std::cerr << "warning: " << msg << "\n";
}

json load_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw DataError("bad JSON in " + path.string() + ": " + e.what());
    }
    return j;
}

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& where) {
    if (!j.is_object()) throw DataError(where + ": expected a JSON object");
    for (const auto& item : j.items()) {
        bool ok = false;
        for (const char* k : allowed)
            if (item.key() == k) {
                ok = true;
                break;
            }
        if (!ok) throw DataError(where + ": unknown field '" + item.key() + "'");
    }
}

// --- simulate ---------------------------------------------------------------

struct SimulateOptions {
    std::string config_path;
    std::string out;
    std::string plant_path;
    std::string setup_path;
    std::uint64_t seed = 0;
    bool seed_given = false;
    int participants = 0;
    double noise_rms = -1.0;
    std::string mode;
    int jobs = 0;
    bool serial = false;
};

BatchSpec spec_from_config(const SimulateOptions& opt, std::string& out_dir) {
    BatchSpec spec = default_batch_spec();
    out_dir = "dataset";

    if (!opt.config_path.empty()) {
        const std::filesystem::path cfg_path = opt.config_path;
        const json cfg = load_json_file(cfg_path);
        check_keys(cfg,
                   {"version", "out", "seed", "participants", "speeds", "forces",
                    "frequencies", "duration_s", "sweeps", "rate_hz", "carrier_hz",
                    "amplitude_vpp", "noise_rms", "mode", "plant_file", "setup_file"},
                   cfg_path.string());
        if (!cfg.contains("version") || cfg.at("version").get<int>() != 1)
            throw DataError(cfg_path.string() + ": config must declare \"version\": 1");

        const auto base_dir = cfg_path.parent_path();
        if (cfg.contains("plant_file"))
            spec.plant = read_plant_config_json(base_dir / cfg.at("plant_file").get<std::string>());
        if (cfg.contains("setup_file"))
            spec.plant.setup =
                read_setup_model_json(base_dir / cfg.at("setup_file").get<std::string>());
        if (cfg.contains("out")) out_dir = cfg.at("out").get<std::string>();
        if (cfg.contains("seed")) spec.base_seed = cfg.at("seed").get<std::uint64_t>();
        if (cfg.contains("participants")) spec.participants = cfg.at("participants").get<int>();
        if (cfg.contains("speeds")) spec.speeds = cfg.at("speeds").get<std::vector<double>>();
        if (cfg.contains("forces")) spec.forces = cfg.at("forces").get<std::vector<double>>();
        if (cfg.contains("frequencies"))
            spec.frequencies = cfg.at("frequencies").get<std::vector<double>>();
        if (cfg.contains("duration_s")) spec.base.duration_s = cfg.at("duration_s").get<double>();
        if (cfg.contains("sweeps")) spec.base.sweeps = cfg.at("sweeps").get<int>();
        if (cfg.contains("rate_hz")) spec.base.rate_hz = cfg.at("rate_hz").get<double>();
        if (cfg.contains("carrier_hz")) spec.base.carrier_hz = cfg.at("carrier_hz").get<double>();
        if (cfg.contains("amplitude_vpp"))
            spec.base.amplitude_vpp = cfg.at("amplitude_vpp").get<double>();
        if (cfg.contains("noise_rms")) spec.plant.noise_rms = cfg.at("noise_rms").get<double>();
        if (cfg.contains("mode")) {
            const std::string mode = cfg.at("mode").get<std::string>();
            if (mode == "linear")
                spec.plant.mode = PlantMode::linear;
            else if (mode == "physical")
                spec.plant.mode = PlantMode::physical;
            else
                throw DataError(cfg_path.string() + ": mode must be 'linear' or 'physical'");
        }
    }

    // flags override the config file
    if (!opt.plant_path.empty()) spec.plant = read_plant_config_json(opt.plant_path);
    if (!opt.setup_path.empty()) spec.plant.setup = read_setup_model_json(opt.setup_path);
    if (!opt.out.empty()) out_dir = opt.out;
    if (opt.seed_given) spec.base_seed = opt.seed;
    if (opt.participants > 0) spec.participants = opt.participants;
    if (opt.noise_rms >= 0.0) spec.plant.noise_rms = opt.noise_rms;
    if (!opt.mode.empty()) {
        if (opt.mode == "linear")
            spec.plant.mode = PlantMode::linear;
        else if (opt.mode == "physical")
            spec.plant.mode = PlantMode::physical;
        else
            throw UsageError("--mode must be 'linear' or 'physical'");
    }

    // environment override wins over both
    if (const char* env = std::getenv("EVIB_SEED")) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end == env || *end != '\0')
            throw UsageError("EVIB_SEED must be an unsigned integer, got '" +
                             std::string(env) + "'");
        spec.base_seed = v;
    }
    return spec;
}

int cmd_simulate(const SimulateOptions& opt) {
    std::string out_dir;
    BatchSpec spec = spec_from_config(opt, out_dir);
    Warnings warnings;
    const auto dirs = opt.serial ? run_batch_serial(spec, out_dir, &warnings)
                                 : run_batch_parallel(spec, out_dir, opt.jobs, &warnings);
    print_warnings(warnings);
    std::cout << "wrote " << dirs.size() << " trials under " << out_dir << " (seed "
              << spec.base_seed << ")\n";
    return 0;
}

// --- extract ----------------------------------------------------------------

int cmd_extract(const std::string& trial_dir_arg, const std::string& out_arg) {
    const std::filesystem::path trial_path = trial_dir_arg;
    const std::filesystem::path out_dir =
        out_arg.empty() ? trial_path : std::filesystem::path(out_arg);
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw DataError("cannot create " + out_dir.string() + ": " + ec.message());

    Warnings warnings;
    const TrialRecord rec = read_trial(trial_path);
    const TrialExtraction ex = extract_trial(rec, &warnings);
    write_frf_points_csv(ex.friction, out_dir / "frf_points.csv");
    write_frf_points_csv(ex.skin, out_dir / "skin_points.csv");
    print_warnings(warnings);
    std::cout << "extracted " << ex.friction.entries.size() << " response points from "
              << trial_path.string() << "\n";
    return 0;
}

// --- identify ---------------------------------------------------------------

struct IdentifyOptions {
    std::string points_path;
    std::string model;
    std::string setup_path;
    bool raw = false;
    double band_hi = 750.0;
    std::string out = "fit.json";
};

int cmd_identify(const IdentifyOptions& opt) {
    FrfPointSet points = read_frf_points_csv(opt.points_path);
    Warnings warnings;
    FitResult fit;
    json params;
    if (opt.model == "first") {
        if (!opt.raw) {
            SetupModel setup = opt.setup_path.empty() ? default_setup_model()
                                                      : read_setup_model_json(opt.setup_path);
            points = remove_setup(points, setup, &warnings);
        }
        fit = fit_first_order(points, opt.band_hi);
        params["k"] = fit.first.k;
        params["f_o_hz"] = fit.first.f_o_hz();
    } else if (opt.model == "second") {
        fit = fit_second_order(points, opt.band_hi);
        params["m"] = fit.skin.m;
        params["b"] = fit.skin.b;
        params["k"] = fit.skin.k;
    } else {
        throw UsageError("--model must be 'first' or 'second'");
    }

    json out;
    out["model"] = opt.model;
    out["params"] = params;
    out["residual"] = fit.residual;
    out["converged"] = fit.converged;
    out["band"] = json::array({fit.band_lo_hz, fit.band_hi_hz});
    out["n_points"] = fit.n_points;
    {
        std::ofstream os(opt.out);
        if (!os) throw DataError("cannot open " + opt.out + " for writing");
        os << out.dump(2) << "\n";
    }
    print_warnings(warnings);
    std::cout << "fit written to " << opt.out << " (residual "
              << fit.residual << ", " << (fit.converged ? "converged" : "NOT converged")
              << ")\n";
    if (!fit.converged)
        throw ConvergenceError("fit did not converge (residual " +
                               std::to_string(fit.residual) + ")");
    return 0;
}

// --- regress / correlate ----------------------------------------------------

int cmd_regress(const std::string& fits_path, const std::string& out_path) {
    const auto cells = read_fits_csv(fits_path);
    std::vector<ParameterSample> k_samples, omega_samples;
    for (const auto& c : cells) {
        if (!c.first.converged) continue;
        k_samples.push_back({c.speed_mm_s, c.force_n, c.participant, c.first.first.k});
        omega_samples.push_back({c.speed_mm_s, c.force_n, c.participant, c.first.first.f_o_hz()});
    }
    const EmpiricalSpeedModel model = build_empirical_model(k_samples, omega_samples);
    write_empirical_model_json(model, out_path);
    std::cout << "empirical model: K_bar=" << model.k_bar << ", cutoff_hz="
              << model.intercept_hz << " + " << model.slope_hz_per_mm_s
              << "*speed, written to " << out_path << "\n";
    return 0;
}

int cmd_correlate(const std::string& fits_path, const std::string& out_path) {
    const auto rows = correlate_cells(read_fits_csv(fits_path));
    write_correlations_csv(rows, out_path);
    std::cout << "wrote " << rows.size() << " correlation rows to " << out_path << "\n";
    return 0;
}

// --- compensate / verify-render ----------------------------------------------

struct RenderCliOptions {
    std::string target_path;
    std::vector<double> tones;
    double tone_amp = 1.0;
    double duration = 0.2;
    double rate = 20000.0;
    std::string model_path;
    double speed = 60.0;
    double design_speed = 0.0;
    RenderConfig cfg;
    std::string plant_path;
    std::string out_message = "message.f64";
    std::string out_drive = "drive.f64";
    std::string out_report;
};

Waveform load_target(const RenderCliOptions& opt) {
    if (!opt.target_path.empty() && !opt.tones.empty())
        throw UsageError("give either --target or --tone, not both");
    if (!opt.target_path.empty()) return read_waveform(opt.target_path);
    if (opt.tones.empty()) throw UsageError("a target is required: --target FILE or --tone HZ");
    Waveform target;
    for (double f : opt.tones) {
        Waveform tone = make_sine(f, opt.tone_amp, 0.0, opt.duration, opt.rate, Unit::newton);
        if (target.samples.empty())
            target = tone;
        else
            for (std::size_t i = 0; i < target.size(); ++i) target.samples[i] += tone.samples[i];
    }
    target.unit = Unit::newton;
    return target;
}

EmpiricalSpeedModel load_model(const std::string& path) {
    return path.empty() ? EmpiricalSpeedModel{} : read_empirical_model_json(path);
}

int cmd_compensate(const RenderCliOptions& opt) {
    const Waveform target = load_target(opt);
    const EmpiricalSpeedModel model = load_model(opt.model_path);
    Warnings warnings;
    const Waveform message = inverse_filter(target, opt.speed, model, opt.cfg, &warnings);
    double saturation = 0.0;
    const Waveform drive = render_voltage(message, opt.cfg, &saturation);
    write_waveform(message, opt.out_message);
    write_waveform(drive, opt.out_drive);
    print_warnings(warnings);
    std::cout << "message -> " << opt.out_message << ", drive -> " << opt.out_drive
              << ", saturation fraction " << saturation << "\n";
    return 0;
}

int cmd_verify_render(const RenderCliOptions& opt) {
    const Waveform target = load_target(opt);
    const EmpiricalSpeedModel model = load_model(opt.model_path);
    PlantConfig plant;
    if (!opt.plant_path.empty()) {
        plant = read_plant_config_json(opt.plant_path);
    } else {
        plant.law.empirical = true;
        plant.law.speed_model = model;
        plant.setup = default_setup_model();
    }
    Warnings warnings;
    const SpectralMatchReport report =
        verify_render(target, opt.speed, opt.cfg, plant, model, opt.design_speed, &warnings);
    print_warnings(warnings);

    std::cout << "band_center_hz  target_rms    achieved_rms  error_db\n";
    char line[160];
    for (std::size_t i = 0; i < report.band_center_hz.size(); ++i) {
        std::snprintf(line, sizeof(line), "%-15.6g %-13.6g %-13.6g %.4f",
                      report.band_center_hz[i], report.target_rms[i],
                      report.achieved_rms[i], report.error_db[i]);
        std::cout << line << "\n";
    }
    std::cout << "worst |error| " << report.worst_error_db << " dB over ["
              << report.band_lo_hz << ", " << report.band_hi_hz
              << "] Hz, saturation fraction " << report.saturation_fraction << "\n";

    if (!opt.out_report.empty()) {
        std::ofstream os(opt.out_report);
        if (!os) throw DataError("cannot open " + opt.out_report + " for writing");
        os << "band_center_hz,target_rms,achieved_rms,error_db\n";
        for (std::size_t i = 0; i < report.band_center_hz.size(); ++i) {
            std::snprintf(line, sizeof(line), "%.17g,%.17g,%.17g,%.17g",
                          report.band_center_hz[i], report.target_rms[i],
                          report.achieved_rms[i], report.error_db[i]);
            os << line << "\n";
        }
    }
    return 0;
}

// --- pipeline / report --------------------------------------------------------

struct PipelineCliOptions {
    std::string dataset;
    std::string out = "analysis";
    std::string setup_path;
    int jobs = 0;
    double band_hi = 750.0;
    double max_fail = 0.10;
};

int cmd_pipeline(const PipelineCliOptions& opt) {
    PipelineOptions popt;
    popt.jobs = opt.jobs;
    popt.fit_band_hi_hz = opt.band_hi;
    popt.max_fail_fraction = opt.max_fail;
    if (!opt.setup_path.empty()) popt.setup = read_setup_model_json(opt.setup_path);
    Warnings warnings;
    const PipelineResult result = run_pipeline(opt.dataset, opt.out, popt, &warnings);
    print_warnings(warnings);
    std::cout << "analyzed " << result.n_trials << " trials ("
              << result.failures.size() << " failed), " << result.cells.size()
              << " cells\n";
    std::cout << report_summary(opt.out, false);
    return 0;
}

int cmd_report(const std::string& out_dir, const std::string& format) {
    if (format != "text" && format != "csv")
        throw UsageError("--format must be 'text' or 'csv'");
    std::cout << report_summary(out_dir, format == "csv");
    return 0;
}

}  // namespace

int run_cli(int argc, char** argv) {
    CLI::App app{"electrovibration friction synthesis and identification toolkit"};
    app.require_subcommand(1);

    SimulateOptions sim;
    auto* c_sim = app.add_subcommand("simulate", "synthesize a dataset of sliding trials");
    c_sim->add_option("--config", sim.config_path, "JSON config (strict, version 1)");
    c_sim->add_option("--out", sim.out, "dataset output directory");
    c_sim->add_option("--plant", sim.plant_path, "plant config JSON");
    c_sim->add_option("--setup", sim.setup_path, "setup model JSON");
    auto* seed_opt = c_sim->add_option("--seed", sim.seed, "base RNG seed");
    c_sim->add_option("--participants", sim.participants, "number of participants");
    c_sim->add_option("--noise", sim.noise_rms, "measurement noise RMS (N)");
    c_sim->add_option("--mode", sim.mode, "plant mode: linear or physical");
    c_sim->add_option("--jobs", sim.jobs, "worker threads (default: all cores)");
    c_sim->add_flag("--serial", sim.serial, "use the serial reference runner");
    c_sim->callback([&]() {
        sim.seed_given = seed_opt->count() > 0;
        cmd_simulate(sim);
    });

    std::string extract_dir, extract_out;
    auto* c_ext = app.add_subcommand("extract", "reduce one trial to response points");
    c_ext->add_option("trial_dir", extract_dir, "trial directory")->required();
    c_ext->add_option("--out", extract_out, "output directory (default: trial dir)");
    c_ext->callback([&]() { cmd_extract(extract_dir, extract_out); });

    IdentifyOptions idn;
    auto* c_idn = app.add_subcommand("identify", "fit a response model to an FRF point cloud");
    c_idn->add_option("points", idn.points_path, "frf_points.csv / skin_points.csv")->required();
    c_idn->add_option("--model", idn.model, "first (friction) or second (skin)")->required();
    c_idn->add_option("--setup", idn.setup_path, "setup model JSON to divide out (first only)");
    c_idn->add_flag("--raw", idn.raw, "skip setup removal");
    c_idn->add_option("--band-hi", idn.band_hi, "fit band ceiling in Hz (default 750)");
    c_idn->add_option("--out", idn.out, "output fit JSON (default fit.json)");
    c_idn->callback([&]() { cmd_identify(idn); });

    std::string regress_fits, regress_out = "empirical_model.json";
    auto* c_reg = app.add_subcommand("regress", "regress per-cell fits into the speed law");
    c_reg->add_option("fits", regress_fits, "fits.csv from the pipeline")->required();
    c_reg->add_option("--out", regress_out, "output model JSON");
    c_reg->callback([&]() { cmd_regress(regress_fits, regress_out); });

    std::string corr_fits, corr_out = "correlations.csv";
    auto* c_cor = app.add_subcommand("correlate", "correlate friction vs skin parameters");
    c_cor->add_option("fits", corr_fits, "fits.csv from the pipeline")->required();
    c_cor->add_option("--out", corr_out, "output CSV");
    c_cor->callback([&]() { cmd_correlate(corr_fits, corr_out); });

    RenderCliOptions ren;
    auto add_render_common = [&](CLI::App* sub) {
        sub->add_option("--target", ren.target_path, "target friction waveform (.f64/.csv)");
        sub->add_option("--tone", ren.tones, "synthesize the target: tone frequency Hz (repeatable)");
        sub->add_option("--tone-amp", ren.tone_amp, "tone amplitude (N, default 1)");
        sub->add_option("--duration", ren.duration, "synthesized target duration s (default 0.2)");
        sub->add_option("--rate", ren.rate, "synthesized target rate Hz (default 20000)");
        sub->add_option("--model", ren.model_path, "empirical model JSON (default: built-in law)");
        sub->add_option("--speed", ren.speed, "sliding speed mm/s (default 60)");
        sub->add_option("--carrier", ren.cfg.carrier_hz, "carrier Hz (default 7000)");
        sub->add_option("--vpp", ren.cfg.v_limit_vpp, "drive peak-to-peak limit V (default 150)");
        sub->add_option("--ceiling", ren.cfg.boost_ceiling, "inverse boost cap (default 10)");
        sub->add_option("--band-lo", ren.cfg.band_lo_hz, "render band low edge Hz (default 30)");
        sub->add_option("--band-hi", ren.cfg.band_hi_hz, "render band high edge Hz (default 1000)");
    };
    auto* c_cmp = app.add_subcommand("compensate", "design the speed-adaptive drive voltage");
    add_render_common(c_cmp);
    c_cmp->add_option("--out-message", ren.out_message, "compensated message output");
    c_cmp->add_option("--out-drive", ren.out_drive, "modulated drive output");
    c_cmp->callback([&]() { cmd_compensate(ren); });

    auto* c_ver = app.add_subcommand("verify-render", "closed-loop spectral check of a render");
    add_render_common(c_ver);
    c_ver->add_option("--design-speed", ren.design_speed,
                      "design the filter at this speed instead of the running speed");
    c_ver->add_option("--plant", ren.plant_path, "plant config JSON (default: matched model)");
    c_ver->add_option("--out", ren.out_report, "per-band report CSV");
    c_ver->callback([&]() { cmd_verify_render(ren); });

    PipelineCliOptions pip;
    auto* c_pip = app.add_subcommand("pipeline", "run the full dataset analysis");
    c_pip->add_option("dataset", pip.dataset, "dataset root directory")->required();
    c_pip->add_option("--out", pip.out, "output directory (default: analysis)");
    c_pip->add_option("--setup", pip.setup_path, "setup model JSON to divide out");
    c_pip->add_option("--jobs", pip.jobs, "worker threads (default: all cores)");
    c_pip->add_option("--band-hi", pip.band_hi, "fit band ceiling Hz (default 750)");
    c_pip->add_option("--max-fail", pip.max_fail, "tolerated failed-trial fraction (default 0.1)");
    c_pip->callback([&]() { cmd_pipeline(pip); });

    std::string report_dir, report_format = "text";
    auto* c_rep = app.add_subcommand("report", "summarize a pipeline output directory");
    c_rep->add_option("outputs", report_dir, "pipeline output directory")->required();
    c_rep->add_option("--format", report_format, "text or csv");
    c_rep->callback([&]() { cmd_report(report_dir, report_format); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ConvergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace evib
