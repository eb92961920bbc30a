#include "cascade/svg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cascade/io.hpp"

namespace cascade::svg {

namespace {

double nice_step(double span) {
  double raw = span / 8;
  double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double f : {1.0, 2.0, 5.0, 10.0})
    if (raw <= f * mag) return f * mag;
  return 10 * mag;
}

std::string num(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%g", v);
  return b;
}

}  // namespace

std::string line_chart(const std::string& title, const std::vector<Series>& series,
                       const std::vector<Marker>& markers, int width, int height) {
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& s : series)
    for (size_t k = 0; k < s.x.size(); ++k) {
      if (!std::isfinite(s.x[k]) || !std::isfinite(s.y[k])) continue;
      xmin = std::min(xmin, s.x[k]); xmax = std::max(xmax, s.x[k]);
      ymin = std::min(ymin, s.y[k]); ymax = std::max(ymax, s.y[k]);
    }
  if (!(xmax > xmin)) { xmin = 0; xmax = 1; }
  if (!(ymax > ymin)) { ymin = 0; ymax = 1; }
  double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad; ymax += ypad;

  const int ml = 56, mr = 16, mt = 34, mb = 40;
  const double pw = width - ml - mr, ph = height - mt - mb;
  auto X = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * pw; };
  auto Y = [&](double y) { return mt + (ymax - y) / (ymax - ymin) * ph; };

  std::ostringstream os;
  os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='"
     << height << "' viewBox='0 0 " << width << ' ' << height << "'>\n"
     << "<rect width='100%' height='100%' fill='white'/>\n"
     << "<text x='" << ml << "' y='20' font-family='sans-serif' font-size='14'>"
     << title << "</text>\n";

  // axes + ticks
  os << "<g stroke='#444' stroke-width='1' font-family='sans-serif' font-size='11'>\n";
  os << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='"
     << mt + ph << "'/>\n";
  os << "<line x1='" << ml << "' y1='" << Y(0.0 >= ymin && 0.0 <= ymax ? 0.0 : ymin)
     << "' x2='" << ml + pw << "' y2='"
     << Y(0.0 >= ymin && 0.0 <= ymax ? 0.0 : ymin) << "'/>\n";
  double xs = nice_step(xmax - xmin);
  for (double t = std::ceil(xmin / xs) * xs; t <= xmax + 1e-9; t += xs) {
    os << "<line x1='" << X(t) << "' y1='" << mt + ph << "' x2='" << X(t) << "' y2='"
       << mt + ph + 4 << "'/>\n";
    os << "<text x='" << X(t) - 6 << "' y='" << mt + ph + 16 << "' stroke='none'>"
       << num(t) << "</text>\n";
  }
  double ys = nice_step(ymax - ymin);
  for (double t = std::ceil(ymin / ys) * ys; t <= ymax + 1e-9; t += ys) {
    os << "<line x1='" << ml - 4 << "' y1='" << Y(t) << "' x2='" << ml << "' y2='"
       << Y(t) << "'/>\n";
    os << "<text x='" << 8 << "' y='" << Y(t) + 4 << "' stroke='none'>" << num(t)
       << "</text>\n";
  }
  os << "</g>\n";

  for (const auto& mk : markers) {
    os << "<line x1='" << X(mk.x) << "' y1='" << mt << "' x2='" << X(mk.x) << "' y2='"
       << mt + ph << "' stroke='#999' stroke-dasharray='2,3'/>\n";
    os << "<text x='" << X(mk.x) + 3 << "' y='" << mt + 12
       << "' font-family='sans-serif' font-size='11' fill='#555'>" << mk.label
       << "</text>\n";
  }

  int li = 0;
  for (const auto& s : series) {
    os << "<polyline fill='none' stroke='" << s.color << "' stroke-width='1.6'";
    if (s.dashed) os << " stroke-dasharray='6,4'";
    os << " points='";
    bool pen = false;
    for (size_t k = 0; k < s.x.size(); ++k) {
      if (!std::isfinite(s.x[k]) || !std::isfinite(s.y[k])) { pen = false; continue; }
      os << X(s.x[k]) << ',' << Y(s.y[k]) << ' ';
      pen = true;
    }
    (void)pen;
    os << "'/>\n";
    os << "<text x='" << width - mr - 150 << "' y='" << mt + 14 + 16 * li
       << "' font-family='sans-serif' font-size='12' fill='" << s.color << "'>"
       << s.label << "</text>\n";
    ++li;
  }
  os << "</svg>\n";
  return os.str();
}

void write_chart(const std::string& path, const std::string& title,
                 const std::vector<Series>& series,
                 const std::vector<Marker>& markers) {
  io::write_text(path, line_chart(title, series, markers));
}

} // namespace cascade::svg
