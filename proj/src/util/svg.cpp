#include "dmca/util/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "dmca/util/errors.hpp"

namespace dmca {

namespace {
const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
                          "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#393b79", "#ad494a"};
}

void write_svg_lines(const std::string& path, const std::string& title,
                     const std::vector<SvgSeries>& series) {
  const double w = 900, h = 480;
  const double ml = 70, mr = 180, mt = 40, mb = 50;
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : series) {
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  }
  if (!(xmin < xmax)) { xmin = 0; xmax = 1; }
  if (!(ymin < ymax)) { ymin -= 0.5; ymax += 0.5; }
  auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (w - ml - mr); };
  auto py = [&](double y) { return h - mb - (y - ymin) / (ymax - ymin) * (h - mt - mb); };

  std::ofstream out(path);
  if (!out) throw DataError("cannot write svg: " + path);
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='" << h << "'>\n";
  out << "<rect width='100%' height='100%' fill='white'/>\n";
  out << "<text x='" << w / 2 << "' y='22' text-anchor='middle' font-size='16'>" << title
      << "</text>\n";
  // axes
  out << "<line x1='" << ml << "' y1='" << h - mb << "' x2='" << w - mr << "' y2='" << h - mb
      << "' stroke='black'/>\n";
  out << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='" << h - mb
      << "' stroke='black'/>\n";
  for (int i = 0; i <= 4; ++i) {
    double xv = xmin + (xmax - xmin) * i / 4.0;
    double yv = ymin + (ymax - ymin) * i / 4.0;
    out << "<text x='" << px(xv) << "' y='" << h - mb + 18
        << "' text-anchor='middle' font-size='11'>" << xv << "</text>\n";
    out << "<text x='" << ml - 6 << "' y='" << py(yv) + 4
        << "' text-anchor='end' font-size='11'>" << yv << "</text>\n";
  }
  int ci = 0;
  for (const auto& s : series) {
    const char* color = kPalette[ci % 12];
    out << "<polyline fill='none' stroke='" << color << "' stroke-width='1.5' points='";
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      out << px(s.x[i]) << "," << py(s.y[i]) << " ";
    }
    out << "'/>\n";
    out << "<text x='" << w - mr + 10 << "' y='" << mt + 16 * ci + 10
        << "' font-size='12' fill='" << color << "'>" << s.label << "</text>\n";
    ++ci;
  }
  out << "</svg>\n";
}

}  // namespace dmca
