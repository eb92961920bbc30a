#pragma once

#include <string>
#include <vector>

namespace cascade::svg {

struct Series {
  std::string label;
  std::string color;   // CSS color
  bool dashed = false;
  std::vector<double> x, y;
};

struct Marker {  // vertical annotation line
  double x = 0;
  std::string label;
};

// Minimal self-contained line chart: axes, ticks, legend, vertical markers.
// Non-finite points break the polyline.
std::string line_chart(const std::string& title, const std::vector<Series>& series,
                       const std::vector<Marker>& markers, int width = 720,
                       int height = 520);

void write_chart(const std::string& path, const std::string& title,
                 const std::vector<Series>& series, const std::vector<Marker>& markers);

} // namespace cascade::svg
