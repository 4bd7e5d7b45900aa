//
// Copyright 2026 The Debias Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "svg_plot.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace debias::cli {
namespace {

constexpr double kWidth = 720;
constexpr double kPanelHeight = 360;
constexpr double kLeft = 80, kRight = 150, kTop = 40, kBottom = 50;

std::string Fixed(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string Tick(double v, double span) {
  if (std::abs(v) < 1e-9 * span) v = 0;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

std::string Escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

// Roughly five round tick values covering [lo, hi].
std::vector<double> LinearTicks(double lo, double hi) {
  const double span = hi - lo;
  if (!(span > 0)) return {lo};
  const double raw = span / 5;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (raw <= m * mag) {
      step = m * mag;
      break;
    }
  }
  std::vector<double> ticks;
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * span; t += step) {
    ticks.push_back(t);
  }
  return ticks;
}

void RenderPanel(const Panel& panel, double y0, std::string& svg) {
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  auto ty = [&](double v) { return panel.log_y ? std::log10(v) : v; };
  for (const Series& s : panel.series) {
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.y[i]) || (panel.log_y && s.y[i] <= 0)) continue;
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, ty(s.y[i]));
      ymax = std::max(ymax, ty(s.y[i]));
    }
  }
  if (!std::isfinite(xmin)) {
    xmin = 0;
    xmax = 1;
    ymin = 0;
    ymax = 1;
  }
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) ymax = ymin + 1;
  const double pad = 0.05 * (ymax - ymin);
  ymin -= pad;
  ymax += pad;

  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kPanelHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - xmin) / (xmax - xmin) * plot_w; };
  auto py = [&](double y) {
    return y0 + kTop + (1 - (y - ymin) / (ymax - ymin)) * plot_h;
  };

  svg += "<text x=\"" + Fixed(kLeft + plot_w / 2) + "\" y=\"" +
         Fixed(y0 + 24) + "\" text-anchor=\"middle\" font-size=\"15\">" +
         Escape(panel.title) + "</text>\n";
  svg += "<rect x=\"" + Fixed(kLeft) + "\" y=\"" + Fixed(y0 + kTop) +
         "\" width=\"" + Fixed(plot_w) + "\" height=\"" + Fixed(plot_h) +
         "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (double t : LinearTicks(xmin, xmax)) {
    svg += "<line x1=\"" + Fixed(px(t)) + "\" y1=\"" + Fixed(y0 + kTop + plot_h) +
           "\" x2=\"" + Fixed(px(t)) + "\" y2=\"" +
           Fixed(y0 + kTop + plot_h + 5) + "\" stroke=\"#444\"/>\n";
    svg += "<text x=\"" + Fixed(px(t)) + "\" y=\"" +
           Fixed(y0 + kTop + plot_h + 18) +
           "\" text-anchor=\"middle\" font-size=\"11\">" + Tick(t, xmax - xmin) + "</text>\n";
  }
  std::vector<double> yticks;
  if (panel.log_y) {
    for (double e = std::ceil(ymin); e <= ymax; e += 1) yticks.push_back(e);
  } else {
    yticks = LinearTicks(ymin, ymax);
  }
  for (double t : yticks) {
    svg += "<line x1=\"" + Fixed(kLeft - 5) + "\" y1=\"" + Fixed(py(t)) +
           "\" x2=\"" + Fixed(kLeft + plot_w) + "\" y2=\"" + Fixed(py(t)) +
           "\" stroke=\"#ddd\"/>\n";
    svg += "<text x=\"" + Fixed(kLeft - 8) + "\" y=\"" + Fixed(py(t) + 4) +
           "\" text-anchor=\"end\" font-size=\"11\">" +
           Tick(panel.log_y ? std::pow(10.0, t) : t, ymax - ymin) + "</text>\n";
  }
  svg += "<text x=\"" + Fixed(kLeft + plot_w / 2) + "\" y=\"" +
         Fixed(y0 + kPanelHeight - 8) +
         "\" text-anchor=\"middle\" font-size=\"12\">" +
         Escape(panel.x_label) + "</text>\n";
  svg += "<text transform=\"translate(18," + Fixed(y0 + kTop + plot_h / 2) +
         ") rotate(-90)\" text-anchor=\"middle\" font-size=\"12\">" +
         Escape(panel.y_label) + "</text>\n";

  double legend_y = y0 + kTop + 12;
  for (const Series& s : panel.series) {
    std::string points;
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.y[i]) || (panel.log_y && s.y[i] <= 0)) continue;
      if (!points.empty()) points += ' ';
      points += Fixed(px(s.x[i])) + "," + Fixed(py(ty(s.y[i])));
    }
    svg += "<polyline fill=\"none\" stroke=\"" + s.color +
           "\" stroke-width=\"1.5\" points=\"" + points + "\"/>\n";
    const double lx = kLeft + plot_w + 12;
    svg += "<line x1=\"" + Fixed(lx) + "\" y1=\"" + Fixed(legend_y) +
           "\" x2=\"" + Fixed(lx + 20) + "\" y2=\"" + Fixed(legend_y) +
           "\" stroke=\"" + s.color + "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + Fixed(lx + 26) + "\" y=\"" + Fixed(legend_y + 4) +
           "\" font-size=\"12\">" + Escape(s.label) + "</text>\n";
    legend_y += 18;
  }
}

}  // namespace

std::string RenderSvg(const std::vector<Panel>& panels,
                      const std::string& comment) {
  const double height = kPanelHeight * std::max<size_t>(panels.size(), 1);
  std::string svg =
      "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<!-- " + comment + " -->\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + Fixed(kWidth, 0) +
         "\" height=\"" + Fixed(height, 0) + "\" viewBox=\"0 0 " +
         Fixed(kWidth, 0) + " " + Fixed(height, 0) +
         "\" font-family=\"sans-serif\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (size_t i = 0; i < panels.size(); ++i) {
    RenderPanel(panels[i], kPanelHeight * i, svg);
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace debias::cli
