#pragma once

#include <string>
#include <vector>

namespace la {

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> yerr; // optional, empty or same size as y
};

struct PlotOptions {
    std::string x_label = "x";
    std::string y_label = "y";
    bool log_x = false;
    int width = 900;
    int height = 600;
};

// Renders value-vs-x series with error bars into a PNG.  Horizontal
// reference lines can be passed as single-point series with label starting
// with '='; everything is drawn with a built-in 5x7 bitmap font.
void write_plot_png(const std::string& path, const std::vector<PlotSeries>& series,
                    const PlotOptions& options);

} // namespace la
