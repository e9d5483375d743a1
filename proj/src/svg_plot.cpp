#include "frd/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace frd {

namespace {

constexpr double kWidth = 640, kPanel = 180, kMarginLeft = 70, kMarginRight = 20, kGap = 40, kTop = 40;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

}  // namespace

std::string svg_line_panels(const std::vector<PlotSeries>& series, const std::string& title, bool log_y) {
  const double height = kTop + series.size() * (kPanel + kGap);
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << height
     << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      double y = s.y[i];
      if (log_y) y = y > 0 ? std::log10(y) : std::numeric_limits<double>::quiet_NaN();
      if (std::isfinite(s.x[i]) && std::isfinite(y)) pts.emplace_back(s.x[i], y);
    }
    const double top = kTop + k * (kPanel + kGap);
    const double left = kMarginLeft, right = kWidth - kMarginRight, bottom = top + kPanel;
    os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << right - left << "\" height=\"" << kPanel
       << "\" fill=\"none\" stroke=\"#888\"/>\n";
    os << "<text x=\"" << left + 4 << "\" y=\"" << top + 14 << "\">" << s.label << (log_y ? " (log10)" : "")
       << "</text>\n";
    if (pts.empty()) continue;

    double x0 = pts.front().first, x1 = x0, y0 = pts.front().second, y1 = y0;
    for (const auto& [x, y] : pts) {
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
    if (x1 == x0) x1 = x0 + 1;
    if (y1 == y0) {
      y0 -= 0.5;
      y1 += 0.5;
    }
    auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * (right - left); };
    auto py = [&](double y) { return bottom - (y - y0) / (y1 - y0) * kPanel; };

    os << "<text x=\"" << left - 4 << "\" y=\"" << top + 10 << "\" text-anchor=\"end\">" << num(y1) << "</text>\n";
    os << "<text x=\"" << left - 4 << "\" y=\"" << bottom << "\" text-anchor=\"end\">" << num(y0) << "</text>\n";
    os << "<text x=\"" << left << "\" y=\"" << bottom + 14 << "\">" << num(x0) << "</text>\n";
    os << "<text x=\"" << right << "\" y=\"" << bottom + 14 << "\" text-anchor=\"end\">" << num(x1) << "</text>\n";
    os << "<polyline fill=\"none\" stroke=\"#1f5fa8\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : pts) os << num(px(x)) << ',' << num(py(y)) << ' ';
    os << "\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace frd
