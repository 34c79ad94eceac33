#include "evib/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "json.hpp"

#include "evib/dataset.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace evib {

namespace {

std::string format_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string format_short(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
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

double quantile_sorted(const std::vector<double>& v, double q) {
    const double h = q * double(v.size() - 1);
    const std::size_t lo = std::size_t(std::floor(h));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - double(lo)) * (v[hi] - v[lo]);
}

constexpr const char* kFitsHeader =
    "participant,speed_mm_s,force_n,k,f_o_hz,first_residual,first_converged,first_n,"
    "m,b,k_spring,second_residual,second_converged,second_n";

}  // namespace

void write_fits_csv(const std::vector<CellFit>& cells, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    out << kFitsHeader << "\n";
    for (const auto& c : cells) {
        out << c.participant << ',' << format_full(c.speed_mm_s) << ','
            << format_full(c.force_n) << ',';
        if (c.first.n_points > 0)
            out << format_full(c.first.first.k) << ',' << format_full(c.first.first.f_o_hz())
                << ',' << format_full(c.first.residual) << ',' << (c.first.converged ? 1 : 0)
                << ',' << c.first.n_points;
        else
            out << ",,,0,0";
        out << ',';
        if (c.second.n_points > 0)
            out << format_full(c.second.skin.m) << ',' << format_full(c.second.skin.b) << ','
                << format_full(c.second.skin.k) << ',' << format_full(c.second.residual) << ','
                << (c.second.converged ? 1 : 0) << ',' << c.second.n_points;
        else
            out << ",,,,0,0";
        out << "\n";
    }
    if (!out) throw DataError("write failed for " + path.string());
}

std::vector<CellFit> read_fits_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty fits file " + path.string());
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    if (line != kFitsHeader)
        throw DataError("unexpected header in " + path.string() + ": '" + line + "'");

    std::vector<CellFit> cells;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        auto f = split_csv_row(line);
        if (f.size() != 14)
            throw DataError("expected 14 columns in " + path.string() + ", got " +
                            std::to_string(f.size()));
        CellFit c;
        c.participant = int(parse_double(f[0], path));
        c.speed_mm_s = parse_double(f[1], path);
        c.force_n = parse_double(f[2], path);
        c.first.kind = FitKind::first_order;
        c.first.n_points = int(parse_double(f[7], path));
        if (c.first.n_points > 0) {
            c.first.first = make_first_order(parse_double(f[3], path), parse_double(f[4], path));
            c.first.residual = parse_double(f[5], path);
            c.first.converged = parse_double(f[6], path) != 0.0;
        }
        c.second.kind = FitKind::second_order;
        c.second.n_points = int(parse_double(f[13], path));
        if (c.second.n_points > 0) {
            c.second.skin.m = parse_double(f[8], path);
            c.second.skin.b = parse_double(f[9], path);
            c.second.skin.k = parse_double(f[10], path);
            c.second.residual = parse_double(f[11], path);
            c.second.converged = parse_double(f[12], path) != 0.0;
        }
        cells.push_back(c);
    }
    return cells;
}

std::vector<std::pair<std::string, Correlation>> correlate_cells(
    const std::vector<CellFit>& cells) {
    std::vector<double> ks, fos, ms, bs, kss;
    for (const auto& c : cells) {
        if (!c.first.converged || !c.second.converged) continue;
        ks.push_back(c.first.first.k);
        fos.push_back(c.first.first.f_o_hz());
        ms.push_back(c.second.skin.m);
        bs.push_back(c.second.skin.b);
        kss.push_back(c.second.skin.k);
    }
    const std::pair<std::string, std::pair<const std::vector<double>*,
                                           const std::vector<double>*>> pairs[] = {
        {"K_vs_skin_m", {&ks, &ms}},  {"f_o_vs_skin_m", {&fos, &ms}},
        {"K_vs_skin_b", {&ks, &bs}},  {"f_o_vs_skin_b", {&fos, &bs}},
        {"K_vs_skin_k", {&ks, &kss}}, {"f_o_vs_skin_k", {&fos, &kss}},
    };
    std::vector<std::pair<std::string, Correlation>> rows;
    for (const auto& [name, xy] : pairs) {
        Correlation c;
        c.n = xy.first->size();
        try {
            c = pearson(*xy.first, *xy.second);
        } catch (const std::exception&) {
            // degenerate input (too few cells or zero variance): report the
            // null result instead of failing the whole table
            c.r = 0.0;
            c.p = 1.0;
        }
        rows.emplace_back(name, c);
    }
    return rows;
}

void write_correlations_csv(const std::vector<std::pair<std::string, Correlation>>& rows,
                            const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    out << "pair,r,p,n\n";
    for (const auto& [name, c] : rows)
        out << name << ',' << format_full(c.r) << ',' << format_full(c.p) << ',' << c.n << "\n";
    if (!out) throw DataError("write failed for " + path.string());
}

namespace {

struct QuartileRow {
    std::string group;
    double group_value = 0.0;
    std::string quantity;
    std::vector<double> values;
};

void append_quartiles(std::vector<QuartileRow>& rows, const std::vector<CellFit>& cells,
                      const std::string& group) {
    std::set<double> levels;
    for (const auto& c : cells)
        levels.insert(group == "speed" ? c.speed_mm_s : c.force_n);
    const std::pair<const char*, int> quantities[] = {
        {"k", 0}, {"f_o_hz", 1}, {"skin_m", 2}, {"skin_b", 3}, {"skin_k", 4}};
    for (double level : levels) {
        for (const auto& [qname, qi] : quantities) {
            QuartileRow row;
            row.group = group;
            row.group_value = level;
            row.quantity = qname;
            for (const auto& c : cells) {
                const double key = group == "speed" ? c.speed_mm_s : c.force_n;
                if (key != level) continue;
                if (qi <= 1) {
                    if (!c.first.converged) continue;
                    row.values.push_back(qi == 0 ? c.first.first.k : c.first.first.f_o_hz());
                } else {
                    if (!c.second.converged) continue;
                    row.values.push_back(qi == 2   ? c.second.skin.m
                                         : qi == 3 ? c.second.skin.b
                                                   : c.second.skin.k);
                }
            }
            if (!row.values.empty()) rows.push_back(std::move(row));
        }
    }
}

std::string svg_color(std::size_t idx) {
    static const char* kPalette[] = {"#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e"};
    return idx < 5 ? kPalette[idx] : "#666666";
}

std::string format_coord(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

void write_bode_svg(const FrfPointSet& points, const std::filesystem::path& path) {
    const double width = 720, height = 480;
    const double x0 = 70, x1 = 680, y0 = 420, y1 = 40;  // plot box, y inverted

    double fmin = 1e300, fmax = 0, dbmin = 1e300, dbmax = -1e300;
    for (const auto& p : points.entries) {
        const double mag = std::abs(p.response);
        if (!(p.freq_hz > 0.0) || !(mag > 0.0)) continue;
        const double db = 20.0 * std::log10(mag);
        fmin = std::min(fmin, p.freq_hz);
        fmax = std::max(fmax, p.freq_hz);
        dbmin = std::min(dbmin, db);
        dbmax = std::max(dbmax, db);
    }
    const bool empty = fmax <= 0;
    if (empty) {
        fmin = 10;
        fmax = 1000;
        dbmin = -60;
        dbmax = 0;
    }
    const double lx_lo = std::log10(fmin) - 0.05, lx_hi = std::log10(fmax) + 0.05;
    dbmin = std::floor(dbmin / 10.0) * 10.0;
    dbmax = std::ceil(dbmax / 10.0) * 10.0;
    if (dbmax - dbmin < 10.0) dbmax = dbmin + 10.0;

    auto sx = [&](double f) {
        return x0 + (std::log10(f) - lx_lo) / (lx_hi - lx_lo) * (x1 - x0);
    };
    auto sy = [&](double db) { return y0 + (db - dbmin) / (dbmax - dbmin) * (y1 - y0); };

    std::set<double> speeds;
    for (const auto& p : points.entries) speeds.insert(p.speed_mm_s);
    std::vector<double> speed_list(speeds.begin(), speeds.end());

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
       << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    os << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
    os << "<rect x=\"" << x0 << "\" y=\"" << y1 << "\" width=\"" << (x1 - x0)
       << "\" height=\"" << (y0 - y1) << "\" fill=\"none\" stroke=\"#444\"/>\n";

    // x ticks at 1-3-10 positions inside range
    for (double decade = 1.0; decade <= 1e5; decade *= 10.0) {
        for (double m : {1.0, 3.0}) {
            const double f = m * decade;
            if (f < fmin * 0.999 || f > fmax * 1.001) continue;
            const double x = sx(f);
            os << "<line x1=\"" << format_coord(x) << "\" y1=\"" << y0 << "\" x2=\""
               << format_coord(x) << "\" y2=\"" << (y0 + 6) << "\" stroke=\"#444\"/>\n";
            os << "<text x=\"" << format_coord(x) << "\" y=\"" << (y0 + 22)
               << "\" font-size=\"12\" text-anchor=\"middle\" fill=\"#222\">"
               << format_short(f) << "</text>\n";
        }
    }
    const double dbstep = (dbmax - dbmin) > 80.0 ? 20.0 : 10.0;
    for (double db = dbmin; db <= dbmax + 1e-9; db += dbstep) {
        const double y = sy(db);
        os << "<line x1=\"" << (x0 - 6) << "\" y1=\"" << format_coord(y) << "\" x2=\"" << x0
           << "\" y2=\"" << format_coord(y) << "\" stroke=\"#444\"/>\n";
        os << "<text x=\"" << (x0 - 10) << "\" y=\"" << format_coord(y + 4)
           << "\" font-size=\"12\" text-anchor=\"end\" fill=\"#222\">" << format_short(db)
           << "</text>\n";
    }
    os << "<text x=\"" << (x0 + (x1 - x0) / 2) << "\" y=\"" << (y0 + 45)
       << "\" font-size=\"13\" text-anchor=\"middle\" fill=\"#222\">frequency (Hz)</text>\n";
    os << "<text x=\"18\" y=\"" << (y1 + (y0 - y1) / 2)
       << "\" font-size=\"13\" text-anchor=\"middle\" fill=\"#222\" transform=\"rotate(-90 18 "
       << (y1 + (y0 - y1) / 2) << ")\">magnitude (dB)</text>\n";

    for (std::size_t s = 0; s < speed_list.size(); ++s) {
        const double lx = x1 - 120, ly = y1 + 16 + 16 * double(s);
        os << "<rect x=\"" << lx << "\" y=\"" << (ly - 9) << "\" width=\"10\" height=\"10\" fill=\""
           << svg_color(s) << "\"/>\n";
        os << "<text x=\"" << (lx + 16) << "\" y=\"" << ly
           << "\" font-size=\"12\" fill=\"#222\">" << format_short(speed_list[s])
           << " mm/s</text>\n";
    }

    for (const auto& p : points.entries) {
        const double mag = std::abs(p.response);
        if (!(p.freq_hz > 0.0) || !(mag > 0.0)) continue;
        const std::size_t idx =
            std::size_t(std::lower_bound(speed_list.begin(), speed_list.end(), p.speed_mm_s) -
                        speed_list.begin());
        os << "<circle cx=\"" << format_coord(sx(p.freq_hz)) << "\" cy=\""
           << format_coord(sy(20.0 * std::log10(mag))) << "\" r=\"2.5\" fill=\""
           << svg_color(idx) << "\" fill-opacity=\"0.55\"/>\n";
    }
    os << "</svg>\n";

    std::ofstream out(path);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    out << os.str();
    if (!out) throw DataError("write failed for " + path.string());
}

}  // namespace

void write_plotdata(const FrfPointSet& friction_points, const std::vector<CellFit>& cells,
                    const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw DataError("cannot create " + dir.string() + ": " + ec.message());

    {
        std::ofstream out(dir / "bode_points.csv");
        if (!out) throw DataError("cannot open " + (dir / "bode_points.csv").string());
        out << "freq_hz,mag,phase_rad,speed_mm_s,force_n,participant,sweep\n";
        for (const auto& p : friction_points.entries)
            out << format_full(p.freq_hz) << ',' << format_full(std::abs(p.response)) << ','
                << format_full(std::arg(p.response)) << ',' << format_full(p.speed_mm_s) << ','
                << format_full(p.force_n) << ',' << p.participant << ',' << p.sweep << "\n";
        if (!out) throw DataError("write failed in " + dir.string());
    }

    {
        std::vector<QuartileRow> rows;
        append_quartiles(rows, cells, "speed");
        append_quartiles(rows, cells, "force");
        std::ofstream out(dir / "quartiles.csv");
        if (!out) throw DataError("cannot open " + (dir / "quartiles.csv").string());
        out << "group,group_value,quantity,min,q1,median,q3,max,n\n";
        for (auto& row : rows) {
            std::sort(row.values.begin(), row.values.end());
            out << row.group << ',' << format_full(row.group_value) << ',' << row.quantity
                << ',' << format_full(row.values.front()) << ','
                << format_full(quantile_sorted(row.values, 0.25)) << ','
                << format_full(quantile_sorted(row.values, 0.5)) << ','
                << format_full(quantile_sorted(row.values, 0.75)) << ','
                << format_full(row.values.back()) << ',' << row.values.size() << "\n";
        }
        if (!out) throw DataError("write failed in " + dir.string());
    }

    write_bode_svg(friction_points, dir / "bode_cloud.svg");
}

PipelineResult run_pipeline(const std::filesystem::path& dataset_root,
                            const std::filesystem::path& out_dir, const PipelineOptions& opt,
                            Warnings* warnings) {
    validate_setup_model(opt.setup);
    const auto dirs = list_trials(dataset_root);
    if (dirs.empty()) throw DataError("no trials found under " + dataset_root.string());

    ExtractionResult extraction = extract_batch_parallel(dirs, opt.jobs, warnings);

    PipelineResult result;
    result.n_trials = extraction.n_trials;
    result.failures = extraction.failures;

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw DataError("cannot create " + out_dir.string() + ": " + ec.message());
    if (!result.failures.empty()) {
        std::ofstream log(out_dir / "failures.log");
        for (const auto& f : result.failures) log << f << "\n";
        for (const auto& f : result.failures) warn(warnings, "pipeline: skipped trial " + f);
    }
    if (double(result.failures.size()) > opt.max_fail_fraction * double(result.n_trials))
        throw DataError(std::to_string(result.failures.size()) + " of " +
                        std::to_string(result.n_trials) +
                        " trials failed extraction (see failures.log)");

    // rig coloring divided out of the friction points; skin points are a
    // ratio of two channels measured behind the same coloring, so it cancels
    FrfPointSet corrected = remove_setup(extraction.friction, opt.setup, warnings);

    // group by grid cell
    std::map<std::tuple<int, double, double>, std::pair<FrfPointSet, FrfPointSet>> groups;
    for (const auto& p : corrected.entries)
        groups[{p.participant, p.speed_mm_s, p.force_n}].first.entries.push_back(p);
    for (const auto& p : extraction.skin.entries)
        groups[{p.participant, p.speed_mm_s, p.force_n}].second.entries.push_back(p);

    std::vector<CellFit> cells(groups.size());
    std::vector<const std::pair<FrfPointSet, FrfPointSet>*> cell_points;
    {
        std::size_t i = 0;
        for (const auto& [key, sets] : groups) {
            cells[i].participant = std::get<0>(key);
            cells[i].speed_mm_s = std::get<1>(key);
            cells[i].force_n = std::get<2>(key);
            cell_points.push_back(&sets);
            ++i;
        }
    }

    std::vector<std::string> fit_notes(cells.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(opt.jobs > 0 ? opt.jobs : omp_get_max_threads())
#endif
    for (long i = 0; i < long(cells.size()); ++i) {
        auto& cell = cells[std::size_t(i)];
        const auto& sets = *cell_points[std::size_t(i)];
        try {
            cell.first = fit_first_order(sets.first, opt.fit_band_hi_hz);
        } catch (const std::exception& e) {
            fit_notes[std::size_t(i)] += "first-order fit: " + std::string(e.what());
        }
        try {
            cell.second = fit_second_order(sets.second, opt.fit_band_hi_hz);
        } catch (const std::exception& e) {
            if (!fit_notes[std::size_t(i)].empty()) fit_notes[std::size_t(i)] += "; ";
            fit_notes[std::size_t(i)] += "skin fit: " + std::string(e.what());
        }
    }
    for (std::size_t i = 0; i < cells.size(); ++i)
        if (!fit_notes[i].empty())
            warn(warnings, "cell (P" + std::to_string(cells[i].participant) + ", v" +
                               format_short(cells[i].speed_mm_s) + ", f" +
                               format_short(cells[i].force_n) + "): " + fit_notes[i]);

    result.cells = cells;

    std::vector<ParameterSample> k_samples, omega_samples;
    for (const auto& c : cells) {
        if (!c.first.converged) continue;
        k_samples.push_back({c.speed_mm_s, c.force_n, c.participant, c.first.first.k});
        omega_samples.push_back({c.speed_mm_s, c.force_n, c.participant, c.first.first.f_o_hz()});
    }
    result.model = build_empirical_model(k_samples, omega_samples);
    result.correlations = correlate_cells(cells);

    write_frf_points_csv(extraction.friction, out_dir / "frf_points.csv");
    write_frf_points_csv(extraction.skin, out_dir / "skin_points.csv");
    write_fits_csv(cells, out_dir / "fits.csv");
    write_empirical_model_json(result.model, out_dir / "empirical_model.json");
    write_correlations_csv(result.correlations, out_dir / "correlations.csv");
    write_plotdata(corrected, cells, out_dir / "plotdata");

    // keep the generating configuration next to the outputs when the dataset
    // recorded it, so reports can show recovered-vs-truth deltas
    for (const auto& dir : dirs) {
        try {
            TrialRecord rec = read_trial(dir);
            if (rec.ground_truth) {
                write_plant_config_json(*rec.ground_truth, out_dir / "ground_truth.json");
                break;
            }
            break;  // first readable trial has no ground truth: stop looking
        } catch (const std::exception&) {
            continue;
        }
    }
    return result;
}

namespace {

nlohmann::json load_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("bad JSON in " + path.string() + ": " + e.what());
    }
    return j;
}

}  // namespace

std::string report_summary(const std::filesystem::path& out_dir, bool csv_format) {
    if (!std::filesystem::exists(out_dir))
        throw DataError("pipeline output directory " + out_dir.string() + " does not exist");

    std::vector<std::string> missing;
    const auto model_path = out_dir / "empirical_model.json";
    const auto fits_path = out_dir / "fits.csv";
    const auto corr_path = out_dir / "correlations.csv";
    const auto truth_path = out_dir / "ground_truth.json";

    bool have_model = std::filesystem::exists(model_path);
    bool have_fits = std::filesystem::exists(fits_path);
    bool have_corr = std::filesystem::exists(corr_path);
    bool have_truth = std::filesystem::exists(truth_path);
    if (!have_model) missing.push_back("empirical_model.json");
    if (!have_fits) missing.push_back("fits.csv");
    if (!have_corr) missing.push_back("correlations.csv");
    if (!have_model && !have_fits && !have_corr)
        throw DataError("no pipeline outputs in " + out_dir.string());

    EmpiricalSpeedModel model;
    if (have_model) model = read_empirical_model_json(model_path);
    std::vector<CellFit> cells;
    if (have_fits) cells = read_fits_csv(fits_path);
    std::size_t first_ok = 0, second_ok = 0;
    for (const auto& c : cells) {
        first_ok += c.first.converged ? 1 : 0;
        second_ok += c.second.converged ? 1 : 0;
    }

    double truth_k = 0, truth_intercept = 0, truth_slope = 0;
    if (have_truth) {
        const PlantConfig truth = read_plant_config_json(truth_path);
        if (truth.law.empirical) {
            truth_k = truth.law.speed_model.k_bar;
            truth_intercept = truth.law.speed_model.intercept_hz;
            truth_slope = truth.law.speed_model.slope_hz_per_mm_s;
        } else {
            truth_k = truth.law.fixed.k;
            truth_intercept = truth.law.fixed.f_o_hz();
            truth_slope = 0.0;
        }
    }
    auto delta_pct = [](double value, double truth) {
        return truth != 0.0 ? 100.0 * (value - truth) / truth : 0.0;
    };

    std::ostringstream os;
    if (csv_format) {
        os << "metric,value\n";
        for (const auto& m : missing) os << "missing," << m << "\n";
        if (have_model) {
            os << "k_bar," << format_full(model.k_bar) << "\n";
            os << "intercept_hz," << format_full(model.intercept_hz) << "\n";
            os << "slope_hz_per_mm_s," << format_full(model.slope_hz_per_mm_s) << "\n";
        }
        if (have_truth) {
            os << "truth_k_bar," << format_full(truth_k) << "\n";
            os << "truth_intercept_hz," << format_full(truth_intercept) << "\n";
            os << "truth_slope_hz_per_mm_s," << format_full(truth_slope) << "\n";
            if (have_model) {
                os << "delta_k_bar_pct," << format_full(delta_pct(model.k_bar, truth_k)) << "\n";
                os << "delta_intercept_pct,"
                   << format_full(delta_pct(model.intercept_hz, truth_intercept)) << "\n";
                os << "delta_slope_pct,"
                   << format_full(delta_pct(model.slope_hz_per_mm_s, truth_slope)) << "\n";
            }
        }
        if (have_fits) {
            os << "n_cells," << cells.size() << "\n";
            os << "n_first_converged," << first_ok << "\n";
            os << "n_second_converged," << second_ok << "\n";
        }
        if (have_corr) {
            std::ifstream in(corr_path);
            std::string line;
            std::getline(in, line);  // drop header
            while (std::getline(in, line)) {
                if (line.empty()) continue;
                auto f = split_csv_row(line);
                if (f.size() == 4) {
                    os << "corr_" << f[0] << "_r," << f[1] << "\n";
                    os << "corr_" << f[0] << "_p," << f[2] << "\n";
                    os << "corr_" << f[0] << "_n," << f[3] << "\n";
                }
            }
        }
        return os.str();
    }

    os << "pipeline outputs in " << out_dir.string() << "\n";
    for (const auto& m : missing) os << "  missing: " << m << "\n";
    if (have_model) {
        os << "recovered friction model:\n";
        os << "  gain K_bar            = " << format_short(model.k_bar);
        if (have_truth)
            os << "  (truth " << format_short(truth_k) << ", "
               << format_short(delta_pct(model.k_bar, truth_k)) << "%)";
        os << "\n";
        os << "  cutoff intercept (Hz) = " << format_short(model.intercept_hz);
        if (have_truth)
            os << "  (truth " << format_short(truth_intercept) << ", "
               << format_short(delta_pct(model.intercept_hz, truth_intercept)) << "%)";
        os << "\n";
        os << "  cutoff slope (Hz per mm/s) = " << format_short(model.slope_hz_per_mm_s);
        if (have_truth)
            os << "  (truth " << format_short(truth_slope) << ", "
               << format_short(delta_pct(model.slope_hz_per_mm_s, truth_slope)) << "%)";
        os << "\n";
    }
    if (have_fits)
        os << "cells: " << cells.size() << " fitted, " << first_ok
           << " converged (friction model), " << second_ok << " converged (skin model)\n";
    if (have_corr) {
        os << "correlations (pair: r, p, n):\n";
        std::ifstream in(corr_path);
        std::string line;
        std::getline(in, line);
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            auto f = split_csv_row(line);
            if (f.size() == 4)
                os << "  " << f[0] << ": r=" << format_short(parse_double(f[1], corr_path))
                   << ", p=" << format_short(parse_double(f[2], corr_path)) << ", n=" << f[3]
                   << "\n";
        }
    }
    return os.str();
}

}  // namespace evib
