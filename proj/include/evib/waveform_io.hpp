#pragma once

#include <filesystem>

#include "evib/waveform.hpp"

namespace evib {

/// CSV form: header `time_s,value,unit,rate_hz`, one row per sample. The time
/// column is derived (i / rate) and ignored on read; unit and rate must be
/// consistent across rows. Values are written with 17 significant digits so
/// the text form round-trips doubles exactly.
void write_waveform_csv(const Waveform& w, const std::filesystem::path& path);
Waveform read_waveform_csv(const std::filesystem::path& path);

/// Binary form: raw little-endian IEEE-754 doubles at `path`, plus a JSON
/// sidecar at `path + ".json"` holding {rate_hz, unit, length}. Round-trips
/// bit-exactly.
void write_waveform_binary(const Waveform& w, const std::filesystem::path& path);
Waveform read_waveform_binary(const std::filesystem::path& path);

/// Dispatch by extension: ".csv" or ".f64".
void write_waveform(const Waveform& w, const std::filesystem::path& path);
Waveform read_waveform(const std::filesystem::path& path);

}  // namespace evib
