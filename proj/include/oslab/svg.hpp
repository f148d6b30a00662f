#pragma once

#include <array>
#include <string>
#include <vector>

#include "oslab/errors.hpp"

namespace oslab::svg {

struct Series {
    std::string label;
    std::string color = "#1f77b4";
    bool line = true; // otherwise scatter markers
    std::vector<std::array<double, 2>> points;
};

struct Plot {
    std::string title;
    std::string xLabel, yLabel;
    bool logX = false, logY = false;
    std::vector<Series> series;
    // axis-aligned outlines (x0, y0, x1, y1), drawn in data coordinates
    std::vector<std::array<double, 4>> rects;
};

// Self-contained single-file plot, fixed 720x540 canvas, deterministic
// output for identical inputs.
void write_plot(const Plot& plot, const std::string& path);

} // namespace oslab::svg
