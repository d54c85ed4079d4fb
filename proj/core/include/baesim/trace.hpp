#pragma once

#include <map>
#include <string>
#include <vector>

#include "baesim/params.hpp"

namespace baesim {

/// One-sided provenance record carried by every trace.
struct TraceMeta {
    std::string generator;                       // "rwa", "matrix", "sde", ...
    std::map<std::string, std::string> fields;   // params snapshot, seed, ...
    std::string timestamp;                       // ISO 8601, set at creation
};

/// PSD samples over a frequency-offset grid, normalized so the vacuum
/// (shot-noise) level is exactly 1. Offsets are angular (rad/s), referenced
/// to the heterodyne local-oscillator frequency.
struct SpectrumTrace {
    std::vector<double> freq_offsets;  // strictly increasing
    std::vector<double> psd;           // >= 0, same length
    TraceMeta meta;

    /// Throws std::invalid_argument when the invariants fail.
    void check() const;
};

/// Default analysis grid: n points, linearly spaced over +-(|delta| + 10 Gamma_eff).
std::vector<double> default_grid(const SystemParams& p, std::size_t n = 2001);
std::vector<double> linspace(double lo, double hi, std::size_t n);

TraceMeta make_meta(const std::string& generator, const SystemParams& p);
std::string iso_timestamp();

/// CSV layout: '#'-prefixed "key = value" metadata lines, a header row
/// "offset_hz,psd_vac_units", then one "%.12g,%.12g" row per sample.
void write_trace_csv(const SpectrumTrace& t, const std::string& path);
std::string trace_to_csv(const SpectrumTrace& t);

/// Reads any two-column numeric CSV with '#' comments; header row optional.
/// First column is ordinary frequency in Hz, converted to rad/s on load.
/// Parse failures report the offending line number.
SpectrumTrace read_trace_csv(const std::string& path);
SpectrumTrace trace_from_csv(const std::string& text, const std::string& origin = "<string>");

} // namespace baesim
