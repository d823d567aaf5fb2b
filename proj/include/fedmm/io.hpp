#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "fedmm/core.hpp"

namespace fedmm {

/// Round-trippable decimal rendering of a double (17 significant digits).
inline std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// Write-then-rename so concurrent seed writers never expose partial files.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out << content;
  }
  std::filesystem::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// ---------------------------------------------------------------------------
// Minimal SVG line plots (log-y), no external plotting dependency.

struct PlotSeries {
  std::string label;
  std::vector<double> x, y;
};

namespace detail {

inline const char* plot_color(std::size_t i) {
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                  "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
  return palette[i % (sizeof(palette) / sizeof(palette[0]))];
}

}  // namespace detail

/// Polyline plot with a linear x axis and log10 y axis. Non-positive y values
/// cannot be drawn on a log axis and are skipped.
inline std::string render_svg_logy(const std::vector<PlotSeries>& series, const std::string& title,
                                   const std::string& x_label, const std::string& y_label) {
  const double W = 880, H = 560, ml = 80, mr = 180, mt = 50, mb = 60;
  double xmin = 0, xmax = 1, ymin = 1e300, ymax = -1e300;
  bool have = false;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!(s.y[i] > 0) || !std::isfinite(s.y[i]) || !std::isfinite(s.x[i])) continue;
      if (!have) {
        xmin = xmax = s.x[i];
        have = true;
      }
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  if (!have) {
    ymin = 1e-1;
    ymax = 1e1;
  }
  if (xmax <= xmin) xmax = xmin + 1;
  double ly_min = std::floor(std::log10(ymin)), ly_max = std::ceil(std::log10(ymax));
  if (ly_max <= ly_min) ly_max = ly_min + 1;
  auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (W - ml - mr); };
  auto py = [&](double y) {
    return H - mb - (std::log10(y) - ly_min) / (ly_max - ly_min) * (H - mt - mb);
  };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt_g17(W) + "\" height=\"" +
         fmt_g17(H) + "\" viewBox=\"0 0 " + fmt_g17(W) + " " + fmt_g17(H) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + fmt_g17(W / 2) + "\" y=\"28\" text-anchor=\"middle\" font-size=\"17\" "
         "font-family=\"sans-serif\">" + title + "</text>\n";
  // frame
  svg += "<rect x=\"" + fmt_g17(ml) + "\" y=\"" + fmt_g17(mt) + "\" width=\"" +
         fmt_g17(W - ml - mr) + "\" height=\"" + fmt_g17(H - mt - mb) +
         "\" fill=\"none\" stroke=\"#333\"/>\n";
  // y ticks at powers of ten
  for (double e = ly_min; e <= ly_max + 1e-9; e += std::max(1.0, std::floor((ly_max - ly_min) / 8.0))) {
    const double yy = py(std::pow(10.0, e));
    svg += "<line x1=\"" + fmt_g17(ml) + "\" y1=\"" + fmt_g17(yy) + "\" x2=\"" +
           fmt_g17(W - mr) + "\" y2=\"" + fmt_g17(yy) + "\" stroke=\"#ddd\"/>\n";
    char lab[32];
    std::snprintf(lab, sizeof(lab), "1e%+03d", static_cast<int>(e));
    svg += "<text x=\"" + fmt_g17(ml - 8) + "\" y=\"" + fmt_g17(yy + 4) +
           "\" text-anchor=\"end\" font-size=\"12\" font-family=\"sans-serif\">" + lab +
           "</text>\n";
  }
  // x ticks
  for (int i = 0; i <= 5; ++i) {
    const double xv = xmin + (xmax - xmin) * i / 5.0;
    const double xx = px(xv);
    svg += "<line x1=\"" + fmt_g17(xx) + "\" y1=\"" + fmt_g17(H - mb) + "\" x2=\"" + fmt_g17(xx) +
           "\" y2=\"" + fmt_g17(H - mb + 5) + "\" stroke=\"#333\"/>\n";
    char lab[32];
    std::snprintf(lab, sizeof(lab), "%.3g", xv);
    svg += "<text x=\"" + fmt_g17(xx) + "\" y=\"" + fmt_g17(H - mb + 20) +
           "\" text-anchor=\"middle\" font-size=\"12\" font-family=\"sans-serif\">" + lab +
           "</text>\n";
  }
  svg += "<text x=\"" + fmt_g17((ml + W - mr) / 2) + "\" y=\"" + fmt_g17(H - 16) +
         "\" text-anchor=\"middle\" font-size=\"14\" font-family=\"sans-serif\">" + x_label +
         "</text>\n";
  svg += "<text x=\"20\" y=\"" + fmt_g17((mt + H - mb) / 2) +
         "\" text-anchor=\"middle\" font-size=\"14\" font-family=\"sans-serif\" transform=\"rotate(-90 "
         "20 " + fmt_g17((mt + H - mb) / 2) + ")\">" + y_label + "</text>\n";
  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    std::string pts;
    bool pen_down = false;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!(s.y[i] > 0) || !std::isfinite(s.y[i]) || !std::isfinite(s.x[i])) {
        pen_down = false;
        continue;
      }
      pts += (pen_down ? "L" : "M");
      pts += fmt_g17(px(s.x[i])) + " " + fmt_g17(py(s.y[i])) + " ";
      pen_down = true;
    }
    svg += "<path d=\"" + pts + "\" fill=\"none\" stroke=\"" + detail::plot_color(si) +
           "\" stroke-width=\"1.8\"/>\n";
    const double ly = mt + 20 + 20 * static_cast<double>(si);
    svg += "<line x1=\"" + fmt_g17(W - mr + 12) + "\" y1=\"" + fmt_g17(ly - 4) + "\" x2=\"" +
           fmt_g17(W - mr + 40) + "\" y2=\"" + fmt_g17(ly - 4) + "\" stroke=\"" +
           detail::plot_color(si) + "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + fmt_g17(W - mr + 46) + "\" y=\"" + fmt_g17(ly) +
           "\" font-size=\"12\" font-family=\"sans-serif\">" + s.label + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace fedmm
