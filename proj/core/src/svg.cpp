#include "baesim/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "baesim/errors.hpp"

namespace baesim::svg {

namespace {

struct Range {
    double lo, hi;
};

Range nice_range(double lo, double hi) {
    if (!(hi > lo)) {
        const double pad = std::max(1.0, std::abs(lo)) * 0.1;
        return {lo - pad, hi + pad};
    }
    const double pad = 0.05 * (hi - lo);
    return {lo - pad, hi + pad};
}

std::vector<double> ticks(const Range& r, int n = 6) {
    const double span = r.hi - r.lo;
    const double raw = span / n;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0})
        if (mag * m >= raw) {
            step = mag * m;
            break;
        }
    std::vector<double> t;
    for (double v = std::ceil(r.lo / step) * step; v <= r.hi + 1e-12 * span; v += step)
        t.push_back(std::abs(v) < 1e-12 * span ? 0.0 : v);
    return t;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

} // namespace

std::string render(const PlotSpec& spec) {
    const int ml = 64, mr = 16, mt = 34, mb = 46;  // margins
    const double pw = spec.width - ml - mr;
    const double ph = spec.height - mt - mb;

    double xlo = 1e300, xhi = -1e300, ylo = 1e300, yhi = -1e300;
    for (const auto& s : spec.series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            xlo = std::min(xlo, s.x[i]);
            xhi = std::max(xhi, s.x[i]);
            ylo = std::min(ylo, s.y[i]);
            yhi = std::max(yhi, s.y[i]);
        }
    if (spec.draw_hline) {
        ylo = std::min(ylo, spec.hline);
        yhi = std::max(yhi, spec.hline);
    }
    if (xlo > xhi) { xlo = 0; xhi = 1; ylo = 0; yhi = 1; }
    const Range rx = nice_range(xlo, xhi);
    const Range ry = nice_range(ylo, yhi);

    auto px = [&](double x) { return ml + pw * (x - rx.lo) / (rx.hi - rx.lo); };
    auto py = [&](double y) { return mt + ph * (1.0 - (y - ry.lo) / (ry.hi - ry.lo)); };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width
       << "\" height=\"" << spec.height << "\" viewBox=\"0 0 " << spec.width << ' '
       << spec.height << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<g font-family=\"sans-serif\" font-size=\"12\" fill=\"#222\">\n";
    if (!spec.title.empty())
        os << "<text x=\"" << spec.width / 2 << "\" y=\"20\" text-anchor=\"middle\" "
           << "font-size=\"14\">" << spec.title << "</text>\n";

    for (double t : ticks(rx)) {
        const double x = px(t);
        os << "<line x1=\"" << x << "\" y1=\"" << mt << "\" x2=\"" << x << "\" y2=\""
           << mt + ph << "\" stroke=\"#e3e3e3\"/>\n";
        os << "<text x=\"" << x << "\" y=\"" << mt + ph + 16
           << "\" text-anchor=\"middle\">" << fmt(t) << "</text>\n";
    }
    for (double t : ticks(ry)) {
        const double y = py(t);
        os << "<line x1=\"" << ml << "\" y1=\"" << y << "\" x2=\"" << ml + pw << "\" y2=\""
           << y << "\" stroke=\"#e3e3e3\"/>\n";
        os << "<text x=\"" << ml - 6 << "\" y=\"" << y + 4
           << "\" text-anchor=\"end\">" << fmt(t) << "</text>\n";
    }
    os << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\""
       << ph << "\" fill=\"none\" stroke=\"#555\"/>\n";
    if (!spec.xlabel.empty())
        os << "<text x=\"" << ml + pw / 2 << "\" y=\"" << spec.height - 10
           << "\" text-anchor=\"middle\">" << spec.xlabel << "</text>\n";
    if (!spec.ylabel.empty())
        os << "<text x=\"14\" y=\"" << mt + ph / 2
           << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 " << mt + ph / 2
           << ")\">" << spec.ylabel << "</text>\n";

    if (spec.draw_hline) {
        const double y = py(spec.hline);
        os << "<line x1=\"" << ml << "\" y1=\"" << y << "\" x2=\"" << ml + pw << "\" y2=\""
           << y << "\" stroke=\"#999\" stroke-dasharray=\"5 4\"/>\n";
    }

    int legend_y = mt + 14;
    for (const auto& s : spec.series) {
        if (s.x.empty()) continue;
        if (!s.markers) {
            os << "<polyline fill=\"none\" stroke=\"" << s.color
               << "\" stroke-width=\"1.5\" points=\"";
            for (std::size_t i = 0; i < s.x.size(); ++i)
                os << fmt(px(s.x[i])) << ',' << fmt(py(s.y[i])) << ' ';
            os << "\"/>\n";
        } else {
            for (std::size_t i = 0; i < s.x.size(); ++i)
                os << "<circle cx=\"" << fmt(px(s.x[i])) << "\" cy=\"" << fmt(py(s.y[i]))
                   << "\" r=\"3\" fill=\"" << s.color << "\"/>\n";
        }
        if (!s.label.empty()) {
            os << "<line x1=\"" << ml + pw - 110 << "\" y1=\"" << legend_y << "\" x2=\""
               << ml + pw - 90 << "\" y2=\"" << legend_y << "\" stroke=\"" << s.color
               << "\" stroke-width=\"2\"/>\n";
            os << "<text x=\"" << ml + pw - 84 << "\" y=\"" << legend_y + 4 << "\">"
               << s.label << "</text>\n";
            legend_y += 16;
        }
    }
    os << "</g>\n</svg>\n";
    return os.str();
}

void write(const PlotSpec& spec, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open for writing: " + path);
    f << render(spec);
    if (!f) throw IoError("write failed: " + path);
}

} // namespace baesim::svg
