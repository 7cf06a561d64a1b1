#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

namespace ica {

// Renders the benchmark summary as a two-panel SVG: median gradient
// max-norm against wall time (left, log-log) and against iteration count
// (right, log y).  A pure function of the summary JSON: same input, same
// bytes out.
inline std::string svg_comparison(const nlohmann::ordered_json& summary) {
  struct Series {
    std::string name;
    std::vector<double> x_time, y_time;
    std::vector<double> x_iter, y_iter;
  };
  std::vector<Series> series;
  for (const auto& solver : summary.at("solvers")) {
    Series s;
    s.name = solver.at("solver").get<std::string>();
    const auto& tc = solver.at("median_time_curve");
    for (const auto& v : tc.at("time_s")) s.x_time.push_back(v.get<double>());
    for (const auto& v : tc.at("grad_inf")) s.y_time.push_back(v.get<double>());
    const auto& ic = solver.at("median_iter_curve");
    for (const auto& v : ic.at("iter")) s.x_iter.push_back(v.get<double>());
    for (const auto& v : ic.at("grad_inf")) s.y_iter.push_back(v.get<double>());
    series.push_back(std::move(s));
  }

  static const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                   "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
  static constexpr double kFloor = 1e-16;  // log-plot guard for exact zeros

  const auto log10s = [](double v) { return std::log10(std::max(v, kFloor)); };

  struct Extent {
    double lo = 1e300, hi = -1e300;
    void add(double v) { lo = std::min(lo, v); hi = std::max(hi, v); }
    void pad() {
      if (hi <= lo) { lo -= 0.5; hi += 0.5; }
    }
  };

  char buf[256];
  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"980\" height=\"430\" "
         "viewBox=\"0 0 980 430\" font-family=\"sans-serif\" font-size=\"11\">\n";
  out += "<rect width=\"980\" height=\"430\" fill=\"white\"/>\n";

  // panel geometry: {x0, y0, x1, y1, title, x log?}
  struct Panel {
    double x0, y0, x1, y1;
    const char* title;
    bool log_x;
  };
  const Panel panels[2] = {{70, 30, 460, 380, "gradient max-norm vs time (s)", true},
                           {580, 30, 950, 380, "gradient max-norm vs iteration", false}};

  for (int p = 0; p < 2; ++p) {
    const Panel& panel = panels[p];
    Extent ex, ey;
    for (const auto& s : series) {
      const auto& xs = p == 0 ? s.x_time : s.x_iter;
      const auto& ys = p == 0 ? s.y_time : s.y_iter;
      for (double v : xs) ex.add(panel.log_x ? log10s(v) : v);
      for (double v : ys) ey.add(log10s(v));
    }
    ex.pad();
    ey.pad();

    const auto map_x = [&](double v) {
      const double u = panel.log_x ? log10s(v) : v;
      return panel.x0 + (u - ex.lo) / (ex.hi - ex.lo) * (panel.x1 - panel.x0);
    };
    const auto map_y = [&](double v) {
      return panel.y1 - (log10s(v) - ey.lo) / (ey.hi - ey.lo) * (panel.y1 - panel.y0);
    };

    std::snprintf(buf, sizeof(buf),
                  "<rect x=\"%.1f\" y=\"%.1f\" width=\"%.1f\" height=\"%.1f\" fill=\"none\" "
                  "stroke=\"#444\"/>\n",
                  panel.x0, panel.y0, panel.x1 - panel.x0, panel.y1 - panel.y0);
    out += buf;
    std::snprintf(buf, sizeof(buf), "<text x=\"%.1f\" y=\"%.1f\" fill=\"#222\">%s</text>\n",
                  panel.x0, panel.y0 - 10.0, panel.title);
    out += buf;

    // y ticks at integer decades
    for (int d = static_cast<int>(std::ceil(ey.lo)); d <= static_cast<int>(std::floor(ey.hi)); ++d) {
      const double y = panel.y1 - (d - ey.lo) / (ey.hi - ey.lo) * (panel.y1 - panel.y0);
      std::snprintf(buf, sizeof(buf),
                    "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"#ddd\"/>"
                    "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"end\" fill=\"#555\">1e%d</text>\n",
                    panel.x0, y, panel.x1, y, panel.x0 - 5.0, y + 3.5, d);
      out += buf;
    }
    // x ticks: 5 evenly spaced in mapped units
    for (int k = 0; k <= 4; ++k) {
      const double u = ex.lo + (ex.hi - ex.lo) * k / 4.0;
      const double x = panel.x0 + (u - ex.lo) / (ex.hi - ex.lo) * (panel.x1 - panel.x0);
      const double label = panel.log_x ? std::pow(10.0, u) : u;
      std::snprintf(buf, sizeof(buf),
                    "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"#444\"/>"
                    "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\" fill=\"#555\">%.3g</text>\n",
                    x, panel.y1, x, panel.y1 + 4.0, x, panel.y1 + 16.0, label);
      out += buf;
    }

    for (std::size_t si = 0; si < series.size(); ++si) {
      const auto& s = series[si];
      const auto& xs = p == 0 ? s.x_time : s.x_iter;
      const auto& ys = p == 0 ? s.y_time : s.y_iter;
      if (xs.empty()) continue;
      std::string points;
      for (std::size_t k = 0; k < xs.size() && k < ys.size(); ++k) {
        std::snprintf(buf, sizeof(buf), "%.2f,%.2f ", map_x(xs[k]), map_y(ys[k]));
        points += buf;
      }
      std::snprintf(buf, sizeof(buf),
                    "<polyline fill=\"none\" stroke=\"%s\" stroke-width=\"1.6\" points=\"%s",
                    kPalette[si % 8], "");
      out += buf;
      out += points;
      out += "\"/>\n";
    }
  }

  // legend, top-right corner of the right panel
  for (std::size_t si = 0; si < series.size(); ++si) {
    const double y = 44.0 + 16.0 * static_cast<double>(si);
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"%s\" "
                  "stroke-width=\"2\"/><text x=\"%.1f\" y=\"%.1f\" fill=\"#222\">%s</text>\n",
                  850.0, y, 880.0, y, kPalette[si % 8], 886.0, y + 3.5, series[si].name.c_str());
    out += buf;
  }
  out += "</svg>\n";
  return out;
}

}  // namespace ica
