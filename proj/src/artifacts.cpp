#include "eot/artifacts.hpp"

#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>

#include "eot/error.hpp"

namespace eot {

void atomic_write_file(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(out.good(), errc::bad_config, "cannot open '" + tmp + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out.good()) {
      out.close();
      std::remove(tmp.c_str());
      fail(errc::bad_config, "failed writing '" + tmp + "'");
    }
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    const std::string why = std::strerror(errno);
    std::remove(tmp.c_str());
    fail(errc::bad_config, "cannot rename '" + tmp + "' to '" + path + "': " + why);
  }
}

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#e377c2"};

std::string fmt(double v, const char* spec = "%.6g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string svg_rate_plot(const std::vector<PlotSeries>& series, const std::string& title) {
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  std::size_t plottable = 0;
  for (const PlotSeries& s : series) {
    require(s.ns.size() == s.deltas.size(), errc::bad_config,
            "svg_rate_plot: series length mismatch");
    for (std::size_t i = 0; i < s.ns.size(); ++i) {
      if (!(s.ns[i] > 0.0) || !(s.deltas[i] > 0.0) || !std::isfinite(s.deltas[i])) continue;
      const double x = std::log10(s.ns[i]);
      const double y = std::log10(s.deltas[i]);
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
      ++plottable;
    }
  }
  require(plottable > 0, errc::bad_config, "svg_rate_plot: no positive finite points to plot");
  if (xmax - xmin < 1e-9) {
    xmin -= 0.5;
    xmax += 0.5;
  }
  if (ymax - ymin < 1e-9) {
    ymin -= 0.5;
    ymax += 0.5;
  }
  const double padx = 0.04 * (xmax - xmin), pady = 0.08 * (ymax - ymin);
  xmin -= padx;
  xmax += padx;
  ymin -= pady;
  ymax += pady;

  const double W = 760, H = 520, ml = 86, mr = 210, mt = 48, mb = 64;
  const double pw = W - ml - mr, ph = H - mt - mb;
  auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return mt + ph - (y - ymin) / (ymax - ymin) * ph; };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(W) + "\" height=\"" + fmt(H) +
         "\" viewBox=\"0 0 " + fmt(W) + " " + fmt(H) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + fmt(ml) + "\" y=\"26\" font-family=\"sans-serif\" font-size=\"15\" "
         "font-weight=\"bold\">" + xml_escape(title) + "</text>\n";
  svg += "<rect x=\"" + fmt(ml) + "\" y=\"" + fmt(mt) + "\" width=\"" + fmt(pw) + "\" height=\"" +
         fmt(ph) + "\" fill=\"none\" stroke=\"#333\"/>\n";

  const int nticks = 5;
  for (int t = 0; t <= nticks; ++t) {
    const double fx = xmin + (xmax - xmin) * t / nticks;
    const double fy = ymin + (ymax - ymin) * t / nticks;
    svg += "<line x1=\"" + fmt(px(fx)) + "\" y1=\"" + fmt(mt) + "\" x2=\"" + fmt(px(fx)) +
           "\" y2=\"" + fmt(mt + ph) + "\" stroke=\"#ddd\"/>\n";
    svg += "<line x1=\"" + fmt(ml) + "\" y1=\"" + fmt(py(fy)) + "\" x2=\"" + fmt(ml + pw) +
           "\" y2=\"" + fmt(py(fy)) + "\" stroke=\"#ddd\"/>\n";
    svg += "<text x=\"" + fmt(px(fx)) + "\" y=\"" + fmt(mt + ph + 20) +
           "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">" +
           fmt(std::pow(10.0, fx), "%.3g") + "</text>\n";
    svg += "<text x=\"" + fmt(ml - 8) + "\" y=\"" + fmt(py(fy) + 4) +
           "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\">" +
           fmt(std::pow(10.0, fy), "%.2e") + "</text>\n";
  }
  svg += "<text x=\"" + fmt(ml + pw / 2) + "\" y=\"" + fmt(H - 16) +
         "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">sample size "
         "n</text>\n";
  svg += "<text x=\"20\" y=\"" + fmt(mt + ph / 2) +
         "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" "
         "transform=\"rotate(-90 20 " + fmt(mt + ph / 2) + ")\">mean absolute deviation</text>\n";

  // Reference decay n^(-1/2) through the plot center.
  {
    const double xc = (xmin + xmax) / 2, yc = (ymin + ymax) / 2;
    const double y1 = yc - 0.5 * (xmin - xc), y2 = yc - 0.5 * (xmax - xc);
    svg += "<line x1=\"" + fmt(px(xmin)) + "\" y1=\"" + fmt(py(y1)) + "\" x2=\"" + fmt(px(xmax)) +
           "\" y2=\"" + fmt(py(y2)) +
           "\" stroke=\"#999\" stroke-dasharray=\"6,4\" stroke-width=\"1.2\"/>\n";
    svg += "<text x=\"" + fmt(W - mr + 14) + "\" y=\"" + fmt(mt + 14) +
           "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#777\">dashed: slope "
           "-1/2</text>\n";
  }

  int color = 0;
  double legend_y = mt + 36;
  for (const PlotSeries& s : series) {
    const char* col = kPalette[color % 8];
    ++color;
    std::string pts;
    for (std::size_t i = 0; i < s.ns.size(); ++i) {
      if (!(s.ns[i] > 0.0) || !(s.deltas[i] > 0.0) || !std::isfinite(s.deltas[i])) continue;
      const double X = px(std::log10(s.ns[i])), Y = py(std::log10(s.deltas[i]));
      pts += fmt(X) + "," + fmt(Y) + " ";
      svg += "<circle cx=\"" + fmt(X) + "\" cy=\"" + fmt(Y) + "\" r=\"2.6\" fill=\"" + col +
             "\"/>\n";
    }
    if (!pts.empty())
      svg += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + std::string(col) +
             "\" stroke-width=\"1.6\"/>\n";
    std::string label = s.label;
    if (s.has_fit) label += "  (slope " + fmt(s.fitted_slope, "%.3f") + ")";
    svg += "<rect x=\"" + fmt(W - mr + 14) + "\" y=\"" + fmt(legend_y - 9) +
           "\" width=\"12\" height=\"12\" fill=\"" + col + "\"/>\n";
    svg += "<text x=\"" + fmt(W - mr + 32) + "\" y=\"" + fmt(legend_y + 1) +
           "\" font-family=\"sans-serif\" font-size=\"12\">" + xml_escape(label) + "</text>\n";
    legend_y += 20;
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace eot
