#ifndef DMCA_UTIL_SVG_HPP
#define DMCA_UTIL_SVG_HPP

#include <string>
#include <vector>

namespace dmca {

// Best-effort static plots for the CSV outputs. One polyline per series.
struct SvgSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

void write_svg_lines(const std::string& path, const std::string& title,
                     const std::vector<SvgSeries>& series);

}  // namespace dmca

#endif
