#pragma once

#include <string>
#include <vector>

namespace baesim::svg {

struct Series {
    std::vector<double> x;
    std::vector<double> y;
    std::string label;
    std::string color = "#1f6fb2";
    bool markers = false;  // draw points instead of relying on the line alone
};

struct PlotSpec {
    std::string title;
    std::string xlabel;
    std::string ylabel;
    std::vector<Series> series;
    double hline = 0.0;      // horizontal reference line (e.g. vacuum floor)
    bool draw_hline = false;
    int width = 720;
    int height = 460;
};

/// Self-contained SVG line plot; no display or font dependencies.
std::string render(const PlotSpec& spec);
void write(const PlotSpec& spec, const std::string& path);

} // namespace baesim::svg
