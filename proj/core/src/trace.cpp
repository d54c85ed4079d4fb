#include "baesim/trace.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "baesim/errors.hpp"

namespace baesim {

void SpectrumTrace::check() const {
    if (freq_offsets.size() != psd.size())
        throw std::invalid_argument("trace: freq/psd length mismatch");
    if (freq_offsets.empty()) throw std::invalid_argument("trace: empty");
    for (std::size_t i = 0; i < psd.size(); ++i) {
        if (!std::isfinite(psd[i]) || psd[i] < 0)
            throw std::invalid_argument("trace: psd must be finite and >= 0");
        if (i > 0 && !(freq_offsets[i] > freq_offsets[i - 1]))
            throw std::invalid_argument("trace: offsets must be strictly increasing");
    }
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    if (n < 2) throw std::invalid_argument("linspace: need n >= 2");
    std::vector<double> g(n);
    const double step = (hi - lo) / double(n - 1);
    for (std::size_t i = 0; i < n; ++i) g[i] = lo + step * double(i);
    g.back() = hi;
    return g;
}

std::vector<double> default_grid(const SystemParams& p, std::size_t n) {
    const double span = std::abs(p.drive.delta) + 10.0 * effective_linewidth(p);
    return linspace(-span, span, n);
}

std::string iso_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

TraceMeta make_meta(const std::string& generator, const SystemParams& p) {
    TraceMeta m;
    m.generator = generator;
    m.timestamp = iso_timestamp();
    for (const auto& [k, v] : snapshot(p)) m.fields[k] = v;
    return m;
}

std::string trace_to_csv(const SpectrumTrace& t) {
    std::ostringstream os;
    os << "# generator = " << t.meta.generator << "\n";
    os << "# timestamp = " << t.meta.timestamp << "\n";
    for (const auto& [k, v] : t.meta.fields) os << "# " << k << " = " << v << "\n";
    os << "offset_hz,psd_vac_units\n";
    char row[80];
    for (std::size_t i = 0; i < t.psd.size(); ++i) {
        std::snprintf(row, sizeof row, "%.12g,%.12g\n", rad_to_hz(t.freq_offsets[i]), t.psd[i]);
        os << row;
    }
    return os.str();
}

void write_trace_csv(const SpectrumTrace& t, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open for writing: " + path);
    f << trace_to_csv(t);
    if (!f) throw IoError("write failed: " + path);
}

SpectrumTrace trace_from_csv(const std::string& text, const std::string& origin) {
    SpectrumTrace t;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') {
            // "# key = value" metadata lines are kept.
            const auto eq = line.find('=');
            if (eq != std::string::npos && line.size() > 1) {
                std::string k = line.substr(1, eq - 1);
                std::string v = line.substr(eq + 1);
                auto strip = [](std::string& s) {
                    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.erase(s.begin());
                    while (!s.empty() && (s.back() == ' ' || s.back() == '\r' || s.back() == '\t')) s.pop_back();
                };
                strip(k);
                strip(v);
                if (!k.empty()) t.meta.fields[k] = v;
            }
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw IoError(origin + ":" + std::to_string(lineno) + ": expected two comma-separated columns");
        try {
            const double f_hz = std::stod(line.substr(0, comma));
            const double val = std::stod(line.substr(comma + 1));
            t.freq_offsets.push_back(hz_to_rad(f_hz));
            t.psd.push_back(val);
        } catch (const std::exception&) {
            if (t.freq_offsets.empty()) continue;  // header row
            throw IoError(origin + ":" + std::to_string(lineno) + ": cannot parse row: '" + line + "'");
        }
    }
    if (t.freq_offsets.empty()) throw IoError(origin + ": no data rows");
    return t;
}

SpectrumTrace read_trace_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open: " + path);
    std::ostringstream buf;
    buf << f.rdbuf();
    return trace_from_csv(buf.str(), path);
}

} // namespace baesim
