#pragma once

#include <string>
#include <vector>

namespace ptc {

struct SvgSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

// Self-contained SVG line chart: axes with ticks, one polyline per series and
// a legend. No external plotting dependency.
std::string line_chart(const std::string& title, const std::string& x_label,
                       const std::string& y_label, const std::vector<SvgSeries>& series);

}  // namespace ptc
