#pragma once

#include "wc4dvar/types.hpp"

#include <string>
#include <vector>

namespace wc4dvar {

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct PlotOptions {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_y = false;
    bool scatter = false;
    int width = 860;
    int height = 560;
};

// Deterministic line/scatter rendering; byte-identical output for identical
// input. Throws ConfigError when there is nothing to draw.
std::string render_svg(const std::vector<PlotSeries>& series, const PlotOptions& opts);

}  // namespace wc4dvar
