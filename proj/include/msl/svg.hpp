#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace msl {

struct PlotSeries {
    std::string label;
    std::vector<std::pair<double, double>> points;
    // Joined by a polyline instead of drawn as markers.
    bool line = false;
    std::string color = "#1f77b4";
};

// Log-log plot; non-positive coordinates are dropped.
std::string loglog_svg(const std::string &title, const std::string &x_label, const std::string &y_label,
                       std::span<const PlotSeries> series);

} // namespace msl
