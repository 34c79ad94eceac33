#include "evib/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <string>

#include "json.hpp"

#include "evib/errors.hpp"
#include "evib/waveform_io.hpp"

namespace evib {

namespace {

using nlohmann::json;

std::string format_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

std::string format_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double parse_double(const std::string& field, const std::filesystem::path& path) {
    try {
        std::size_t pos = 0;
        double v = std::stod(field, &pos);
        if (pos != field.size()) throw std::invalid_argument(field);
        return v;
    } catch (const std::exception&) {
        throw DataError("malformed number '" + field + "' in " + path.string());
    }
}

long parse_long(const std::string& field, const std::filesystem::path& path) {
    try {
        std::size_t pos = 0;
        long v = std::stol(field, &pos);
        if (pos != field.size()) throw std::invalid_argument(field);
        return v;
    } catch (const std::exception&) {
        throw DataError("malformed integer '" + field + "' in " + path.string());
    }
}

std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
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

json protocol_to_json(const TrialProtocol& p) {
    json j;
    j["message_freq_hz"] = p.message_freq_hz;
    j["speed_mm_s"] = p.speed_mm_s;
    j["force_n"] = p.force_n;
    j["carrier_hz"] = p.carrier_hz;
    j["amplitude_vpp"] = p.amplitude_vpp;
    j["duration_s"] = p.duration_s;
    j["sweeps"] = p.sweeps;
    j["rate_hz"] = p.rate_hz;
    return j;
}

TrialProtocol protocol_from_json(const json& j, const std::string& where) {
    check_keys(j,
               {"message_freq_hz", "speed_mm_s", "force_n", "carrier_hz", "amplitude_vpp",
                "duration_s", "sweeps", "rate_hz"},
               where);
    TrialProtocol p;
    p.message_freq_hz = j.at("message_freq_hz").get<double>();
    p.speed_mm_s = j.at("speed_mm_s").get<double>();
    p.force_n = j.at("force_n").get<double>();
    p.carrier_hz = j.at("carrier_hz").get<double>();
    p.amplitude_vpp = j.at("amplitude_vpp").get<double>();
    p.duration_s = j.at("duration_s").get<double>();
    p.sweeps = j.at("sweeps").get<int>();
    p.rate_hz = j.at("rate_hz").get<double>();
    return p;
}

json speed_model_to_json(const EmpiricalSpeedModel& m) {
    json j;
    j["k_bar"] = m.k_bar;
    j["intercept_hz"] = m.intercept_hz;
    j["slope_hz_per_mm_s"] = m.slope_hz_per_mm_s;
    j["speed_min"] = m.speed_min;
    j["speed_max"] = m.speed_max;
    j["force_min"] = m.force_min;
    j["force_max"] = m.force_max;
    j["amplitude_vpp"] = m.amplitude_vpp;
    return j;
}

EmpiricalSpeedModel speed_model_from_json(const json& j, const std::string& where) {
    check_keys(j,
               {"k_bar", "intercept_hz", "slope_hz_per_mm_s", "speed_min", "speed_max",
                "force_min", "force_max", "amplitude_vpp"},
               where);
    EmpiricalSpeedModel m;
    m.k_bar = j.at("k_bar").get<double>();
    m.intercept_hz = j.at("intercept_hz").get<double>();
    m.slope_hz_per_mm_s = j.at("slope_hz_per_mm_s").get<double>();
    m.speed_min = j.at("speed_min").get<double>();
    m.speed_max = j.at("speed_max").get<double>();
    m.force_min = j.at("force_min").get<double>();
    m.force_max = j.at("force_max").get<double>();
    m.amplitude_vpp = j.at("amplitude_vpp").get<double>();
    return m;
}

json plant_to_json(const PlantConfig& cfg) {
    json j;
    j["mu"] = cfg.mu;
    j["k_e"] = cfg.k_e;
    j["noise_rms"] = cfg.noise_rms;
    j["mode"] = cfg.mode == PlantMode::linear ? "linear" : "physical";
    json law;
    law["empirical"] = cfg.law.empirical;
    law["speed_model"] = speed_model_to_json(cfg.law.speed_model);
    json fixed;
    fixed["k"] = cfg.law.fixed.k;
    fixed["f_o_hz"] = cfg.law.fixed.f_o_hz();
    law["fixed"] = fixed;
    j["law"] = law;
    json skin;
    skin["m"] = cfg.skin.m;
    skin["b"] = cfg.skin.b;
    skin["k"] = cfg.skin.k;
    j["skin"] = skin;
    json normal;
    normal["k_snd"] = cfg.setup.normal.k_snd;
    normal["f_n_hz"] = cfg.setup.normal.f_n_hz;
    normal["zeta"] = cfg.setup.normal.zeta;
    json lateral;
    lateral["f_n_hz"] = cfg.setup.lateral.f_n_hz;
    lateral["zeta"] = cfg.setup.lateral.zeta;
    lateral["b3"] = cfg.setup.lateral.b3;
    lateral["b2"] = cfg.setup.lateral.b2;
    lateral["b1"] = cfg.setup.lateral.b1;
    lateral["a3"] = cfg.setup.lateral.a3;
    lateral["a2"] = cfg.setup.lateral.a2;
    lateral["a1"] = cfg.setup.lateral.a1;
    j["setup"] = json{{"normal", normal}, {"lateral", lateral}};
    return j;
}

PlantConfig plant_from_json(const json& j, const std::string& where) {
    check_keys(j, {"mu", "k_e", "noise_rms", "mode", "law", "skin", "setup"}, where);
    PlantConfig cfg;
    cfg.mu = j.at("mu").get<double>();
    cfg.k_e = j.at("k_e").get<double>();
    cfg.noise_rms = j.at("noise_rms").get<double>();
    const std::string mode = j.at("mode").get<std::string>();
    if (mode == "linear")
        cfg.mode = PlantMode::linear;
    else if (mode == "physical")
        cfg.mode = PlantMode::physical;
    else
        throw DataError(where + ": mode must be 'linear' or 'physical', got '" + mode + "'");

    const json& law = j.at("law");
    check_keys(law, {"empirical", "speed_model", "fixed"}, where + ".law");
    cfg.law.empirical = law.at("empirical").get<bool>();
    cfg.law.speed_model = speed_model_from_json(law.at("speed_model"), where + ".law.speed_model");
    const json& fixed = law.at("fixed");
    check_keys(fixed, {"k", "f_o_hz"}, where + ".law.fixed");
    const double fixed_k = fixed.at("k").get<double>();
    const double fixed_f = fixed.at("f_o_hz").get<double>();
    // the fixed branch is an unused placeholder while the empirical law drives
    // the plant; only a meaningful value must satisfy the model invariants
    if (!cfg.law.empirical || (fixed_k > 0.0 && fixed_f > 0.0)) {
        cfg.law.fixed = make_first_order(fixed_k, fixed_f);
    } else {
        cfg.law.fixed.k = fixed_k;
        cfg.law.fixed.omega_o = 2.0 * std::numbers::pi * fixed_f;
    }

    const json& skin = j.at("skin");
    check_keys(skin, {"m", "b", "k"}, where + ".skin");
    cfg.skin.m = skin.at("m").get<double>();
    cfg.skin.b = skin.at("b").get<double>();
    cfg.skin.k = skin.at("k").get<double>();

    const json& setup = j.at("setup");
    check_keys(setup, {"normal", "lateral"}, where + ".setup");
    const json& normal = setup.at("normal");
    check_keys(normal, {"k_snd", "f_n_hz", "zeta"}, where + ".setup.normal");
    cfg.setup.normal.k_snd = normal.at("k_snd").get<double>();
    cfg.setup.normal.f_n_hz = normal.at("f_n_hz").get<double>();
    cfg.setup.normal.zeta = normal.at("zeta").get<double>();
    const json& lateral = setup.at("lateral");
    check_keys(lateral, {"f_n_hz", "zeta", "b3", "b2", "b1", "a3", "a2", "a1"},
               where + ".setup.lateral");
    cfg.setup.lateral.f_n_hz = lateral.at("f_n_hz").get<double>();
    cfg.setup.lateral.zeta = lateral.at("zeta").get<double>();
    cfg.setup.lateral.b3 = lateral.at("b3").get<double>();
    cfg.setup.lateral.b2 = lateral.at("b2").get<double>();
    cfg.setup.lateral.b1 = lateral.at("b1").get<double>();
    cfg.setup.lateral.a3 = lateral.at("a3").get<double>();
    cfg.setup.lateral.a2 = lateral.at("a2").get<double>();
    cfg.setup.lateral.a1 = lateral.at("a1").get<double>();
    return cfg;
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

void store_json_file(const json& j, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    out << j.dump(2) << "\n";
    if (!out) throw DataError("write failed for " + path.string());
}

constexpr const char* kChannelNames[] = {"voltage", "force_x", "force_y", "force_normal",
                                         "accel_x", "accel_y", "accel_z"};

Waveform* channel_of(TrialRecord& rec, const std::string& name) {
    if (name == "voltage") return &rec.voltage;
    if (name == "force_x") return &rec.force_x;
    if (name == "force_y") return &rec.force_y;
    if (name == "force_normal") return &rec.force_normal;
    if (name == "accel_x") return &rec.accel_x;
    if (name == "accel_y") return &rec.accel_y;
    if (name == "accel_z") return &rec.accel_z;
    return nullptr;
}

}  // namespace

std::filesystem::path trial_dir(const std::filesystem::path& root, int participant,
                                const TrialProtocol& proto) {
    return root / ("P" + std::to_string(participant)) / ("v" + format_g(proto.speed_mm_s)) /
           ("f" + format_g(proto.force_n)) / ("freq" + format_g(proto.message_freq_hz));
}

void write_trial(const TrialRecord& rec, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw DataError("cannot create " + dir.string() + ": " + ec.message());

    const std::pair<const char*, const Waveform*> channels[] = {
        {"voltage", &rec.voltage},   {"force_x", &rec.force_x}, {"force_y", &rec.force_y},
        {"force_normal", &rec.force_normal}, {"accel_x", &rec.accel_x},
        {"accel_y", &rec.accel_y},   {"accel_z", &rec.accel_z}};
    for (const auto& [name, w] : channels)
        write_waveform_binary(*w, dir / (std::string(name) + ".f64"));

    {
        std::ofstream out(dir / "position.csv");
        if (!out) throw DataError("cannot open " + (dir / "position.csv").string());
        out << "time_s,position_mm\n";
        for (const auto& p : rec.position)
            out << format_full(p.time_s) << ',' << format_full(p.position_mm) << "\n";
        if (!out) throw DataError("write failed for " + (dir / "position.csv").string());
    }

    json meta;
    meta["version"] = 1;
    meta["participant"] = rec.participant;
    meta["seed"] = rec.seed;
    meta["protocol"] = protocol_to_json(rec.proto);
    if (rec.ground_truth) meta["ground_truth"] = plant_to_json(*rec.ground_truth);
    store_json_file(meta, dir / "meta.json");
}

TrialRecord read_trial(const std::filesystem::path& dir) {
    const auto meta_path = dir / "meta.json";
    const json meta = load_json_file(meta_path);
    check_keys(meta, {"version", "participant", "seed", "protocol", "ground_truth"},
               meta_path.string());
    if (meta.at("version").get<int>() != 1)
        throw DataError(meta_path.string() + ": unsupported version");

    TrialRecord rec;
    rec.participant = meta.at("participant").get<int>();
    rec.seed = meta.at("seed").get<std::uint64_t>();
    rec.proto = protocol_from_json(meta.at("protocol"), meta_path.string() + ".protocol");
    if (meta.contains("ground_truth"))
        rec.ground_truth =
            plant_from_json(meta.at("ground_truth"), meta_path.string() + ".ground_truth");

    for (const char* name : kChannelNames)
        *channel_of(rec, name) = read_waveform_binary(dir / (std::string(name) + ".f64"));
    const std::size_t n = rec.voltage.size();
    for (const char* name : kChannelNames)
        if (channel_of(rec, name)->size() != n)
            throw DataError(dir.string() + ": channel length mismatch in " + name);

    const auto pos_path = dir / "position.csv";
    std::ifstream in(pos_path);
    if (!in) throw DataError("cannot open " + pos_path.string());
    std::string line;
    if (!std::getline(in, line) || split_csv_row(line) != std::vector<std::string>{
                                                              "time_s", "position_mm"})
        throw DataError("unexpected header in " + pos_path.string());
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        auto fields = split_csv_row(line);
        if (fields.size() != 2)
            throw DataError("expected 2 columns in " + pos_path.string());
        rec.position.push_back(
            {parse_double(fields[0], pos_path), parse_double(fields[1], pos_path)});
    }
    return rec;
}

std::vector<std::filesystem::path> list_trials(const std::filesystem::path& root) {
    if (!std::filesystem::exists(root)) throw DataError("dataset root " + root.string() + " does not exist");
    std::vector<std::filesystem::path> dirs;
    for (auto it = std::filesystem::recursive_directory_iterator(root);
         it != std::filesystem::recursive_directory_iterator(); ++it) {
        if (it->is_regular_file() && it->path().filename() == "meta.json")
            dirs.push_back(it->path().parent_path());
    }
    std::sort(dirs.begin(), dirs.end());
    return dirs;
}

void write_frf_points_csv(const FrfPointSet& points, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    out << "freq_hz,re,im,sweep,speed_mm_s,force_n,participant\n";
    for (const auto& p : points.entries)
        out << format_full(p.freq_hz) << ',' << format_full(p.response.real()) << ','
            << format_full(p.response.imag()) << ',' << p.sweep << ','
            << format_full(p.speed_mm_s) << ',' << format_full(p.force_n) << ','
            << p.participant << "\n";
    if (!out) throw DataError("write failed for " + path.string());
}

FrfPointSet read_frf_points_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line))
        throw DataError("empty points file " + path.string());
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    if (line != "freq_hz,re,im,sweep,speed_mm_s,force_n,participant")
        throw DataError("unexpected header in " + path.string() + ": '" + line + "'");
    FrfPointSet set;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        auto fields = split_csv_row(line);
        if (fields.size() != 7)
            throw DataError("expected 7 columns in " + path.string() + ", got " +
                            std::to_string(fields.size()));
        FrfPoint p;
        p.freq_hz = parse_double(fields[0], path);
        p.response = {parse_double(fields[1], path), parse_double(fields[2], path)};
        p.sweep = int(parse_long(fields[3], path));
        p.speed_mm_s = parse_double(fields[4], path);
        p.force_n = parse_double(fields[5], path);
        p.participant = int(parse_long(fields[6], path));
        set.entries.push_back(p);
    }
    return set;
}

void write_plant_config_json(const PlantConfig& cfg, const std::filesystem::path& path) {
    store_json_file(plant_to_json(cfg), path);
}

PlantConfig read_plant_config_json(const std::filesystem::path& path) {
    return plant_from_json(load_json_file(path), path.string());
}

}  // namespace evib
