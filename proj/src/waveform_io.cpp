#include "evib/waveform_io.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "evib/errors.hpp"

namespace evib {

namespace {

constexpr const char* kCsvHeader = "time_s,value,unit,rate_hz";

std::string format_double(double v) {
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

}  // namespace

void write_waveform_csv(const Waveform& w, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    out << kCsvHeader << "\n";
    const std::string unit = unit_to_string(w.unit);
    const std::string rate = format_double(w.rate_hz);
    for (std::size_t i = 0; i < w.size(); ++i) {
        out << format_double(static_cast<double>(i) / w.rate_hz) << ','
            << format_double(w.samples[i]) << ',' << unit << ',' << rate << "\n";
    }
    if (!out) throw DataError("write failed for " + path.string());
}

Waveform read_waveform_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty waveform file " + path.string());
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    if (line != kCsvHeader)
        throw DataError("unexpected CSV header in " + path.string() + ": '" + line + "'");

    Waveform w;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        auto fields = split_csv_row(line);
        if (fields.size() != 4)
            throw DataError("expected 4 columns in " + path.string() + ", got " +
                            std::to_string(fields.size()));
        w.samples.push_back(parse_double(fields[1], path));
        if (first) {
            w.unit = unit_from_string(fields[2]);
            w.rate_hz = parse_double(fields[3], path);
            if (!(w.rate_hz > 0.0))
                throw DataError("nonpositive rate_hz in " + path.string());
            first = false;
        } else if (fields[2] != unit_to_string(w.unit) ||
                   parse_double(fields[3], path) != w.rate_hz) {
            throw DataError("inconsistent unit/rate columns in " + path.string());
        }
    }
    if (w.samples.empty()) throw DataError("no samples in " + path.string());
    return w;
}

void write_waveform_binary(const Waveform& w, const std::filesystem::path& path) {
    {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw DataError("cannot open " + path.string() + " for writing");
        if (std::endian::native == std::endian::little) {
            out.write(reinterpret_cast<const char*>(w.samples.data()),
                      static_cast<std::streamsize>(w.samples.size() * sizeof(double)));
        } else {
            for (double v : w.samples) {
                auto bits = std::bit_cast<std::uint64_t>(v);
                char b[8];
                for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
                out.write(b, 8);
            }
        }
        if (!out) throw DataError("write failed for " + path.string());
    }
    nlohmann::json sidecar;
    sidecar["rate_hz"] = w.rate_hz;
    sidecar["unit"] = unit_to_string(w.unit);
    sidecar["length"] = w.samples.size();
    std::ofstream js(path.string() + ".json");
    if (!js) throw DataError("cannot open sidecar for " + path.string());
    js << sidecar.dump(2) << "\n";
    if (!js) throw DataError("sidecar write failed for " + path.string());
}

Waveform read_waveform_binary(const std::filesystem::path& path) {
    const std::filesystem::path sidecar_path = path.string() + ".json";
    std::ifstream js(sidecar_path);
    if (!js) throw DataError("missing sidecar " + sidecar_path.string());
    nlohmann::json sidecar;
    try {
        js >> sidecar;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("bad sidecar " + sidecar_path.string() + ": " + e.what());
    }
    Waveform w;
    try {
        w.rate_hz = sidecar.at("rate_hz").get<double>();
        w.unit = unit_from_string(sidecar.at("unit").get<std::string>());
        w.samples.resize(sidecar.at("length").get<std::size_t>());
    } catch (const nlohmann::json::exception& e) {
        throw DataError("bad sidecar " + sidecar_path.string() + ": " + e.what());
    }
    if (!(w.rate_hz > 0.0)) throw DataError("nonpositive rate_hz in " + sidecar_path.string());

    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    in.seekg(0, std::ios::end);
    const auto bytes = static_cast<std::uint64_t>(in.tellg());
    if (bytes != w.samples.size() * sizeof(double))
        throw DataError("size mismatch for " + path.string() + ": sidecar says " +
                        std::to_string(w.samples.size()) + " samples, file has " +
                        std::to_string(bytes) + " bytes");
    in.seekg(0);
    if (std::endian::native == std::endian::little) {
        in.read(reinterpret_cast<char*>(w.samples.data()),
                static_cast<std::streamsize>(bytes));
    } else {
        for (double& v : w.samples) {
            char b[8];
            in.read(b, 8);
            std::uint64_t bits = 0;
            for (int i = 0; i < 8; ++i)
                bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(b[i])) << (8 * i);
            v = std::bit_cast<double>(bits);
        }
    }
    if (!in) throw DataError("read failed for " + path.string());
    return w;
}

void write_waveform(const Waveform& w, const std::filesystem::path& path) {
    const auto ext = path.extension().string();
    if (ext == ".csv") return write_waveform_csv(w, path);
    if (ext == ".f64") return write_waveform_binary(w, path);
    throw UsageError("unknown waveform extension '" + ext + "' (use .csv or .f64)");
}

Waveform read_waveform(const std::filesystem::path& path) {
    const auto ext = path.extension().string();
    if (ext == ".csv") return read_waveform_csv(path);
    if (ext == ".f64") return read_waveform_binary(path);
    throw UsageError("unknown waveform extension '" + ext + "' (use .csv or .f64)");
}

}  // namespace evib
