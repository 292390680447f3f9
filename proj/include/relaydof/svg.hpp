/*
 * Copyright 2026 The relaydof Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef RELAYDOF_SVG_HPP
#define RELAYDOF_SVG_HPP

#include <algorithm>
#include <cstdio>
#include <string>
#include <vector>

#include "relaydof/errors.hpp"

namespace relaydof {

/// Minimal self-contained SVG 1.1 line chart (no plotting dependency):
/// one series, axis ticks, and a free-text annotation.
inline std::string svg_line_chart(const std::string& title,
                                  const std::string& x_label,
                                  const std::string& y_label,
                                  const std::vector<double>& xs,
                                  const std::vector<double>& ys,
                                  const std::string& annotation) {
  if (xs.size() != ys.size() || xs.empty()) {
    throw ConfigError("svg_line_chart: series size mismatch");
  }
  const double width = 640.0, height = 480.0;
  const double ml = 70.0, mr = 25.0, mt = 45.0, mb = 55.0;
  const double x_min = xs.front(), x_max = xs.back();
  double y_min = *std::min_element(ys.begin(), ys.end());
  double y_max = *std::max_element(ys.begin(), ys.end());
  if (y_max - y_min < 1e-12) y_max = y_min + 1.0;
  const double pad = 0.05 * (y_max - y_min);
  y_min -= pad;
  y_max += pad;

  auto px = [&](double x) {
    return ml + (x - x_min) / (x_max - x_min) * (width - ml - mr);
  };
  auto py = [&](double y) {
    return height - mb - (y - y_min) / (y_max - y_min) * (height - mt - mb);
  };
  char buf[256];
  std::string s;
  s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  std::snprintf(buf, sizeof(buf),
                "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" "
                "width=\"%.0f\" height=\"%.0f\" viewBox=\"0 0 %.0f %.0f\">\n",
                width, height, width, height);
  s += buf;
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof(buf),
                "<text x=\"%.1f\" y=\"24\" font-family=\"sans-serif\" "
                "font-size=\"16\" text-anchor=\"middle\">%s</text>\n",
                width / 2, title.c_str());
  s += buf;

  // axes
  std::snprintf(buf, sizeof(buf),
                "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" "
                "stroke=\"black\"/>\n",
                ml, height - mb, width - mr, height - mb);
  s += buf;
  std::snprintf(buf, sizeof(buf),
                "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" "
                "stroke=\"black\"/>\n",
                ml, mt, ml, height - mb);
  s += buf;

  // ticks
  const int n_ticks = 5;
  for (int i = 0; i <= n_ticks; ++i) {
    const double xv = x_min + (x_max - x_min) * i / n_ticks;
    const double yv = y_min + (y_max - y_min) * i / n_ticks;
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" "
                  "stroke=\"black\"/>\n",
                  px(xv), height - mb, px(xv), height - mb + 5);
    s += buf;
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%.1f\" y=\"%.1f\" font-family=\"sans-serif\" "
                  "font-size=\"11\" text-anchor=\"middle\">%.4g</text>\n",
                  px(xv), height - mb + 18, xv);
    s += buf;
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" "
                  "stroke=\"black\"/>\n",
                  ml - 5, py(yv), ml, py(yv));
    s += buf;
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%.1f\" y=\"%.1f\" font-family=\"sans-serif\" "
                  "font-size=\"11\" text-anchor=\"end\">%.4g</text>\n",
                  ml - 8, py(yv) + 4, yv);
    s += buf;
  }

  // labels
  std::snprintf(buf, sizeof(buf),
                "<text x=\"%.1f\" y=\"%.1f\" font-family=\"sans-serif\" "
                "font-size=\"13\" text-anchor=\"middle\">%s</text>\n",
                ml + (width - ml - mr) / 2, height - 12, x_label.c_str());
  s += buf;
  std::snprintf(buf, sizeof(buf),
                "<text x=\"16\" y=\"%.1f\" font-family=\"sans-serif\" "
                "font-size=\"13\" text-anchor=\"middle\" "
                "transform=\"rotate(-90 16 %.1f)\">%s</text>\n",
                mt + (height - mt - mb) / 2, mt + (height - mt - mb) / 2,
                y_label.c_str());
  s += buf;

  // series
  s += "<polyline fill=\"none\" stroke=\"#1f6fb2\" stroke-width=\"2\" points=\"";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.2f,%.2f ", px(xs[i]), py(ys[i]));
    s += buf;
  }
  s += "\"/>\n";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    std::snprintf(buf, sizeof(buf),
                  "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"3\" "
                  "fill=\"#1f6fb2\"/>\n",
                  px(xs[i]), py(ys[i]));
    s += buf;
  }

  if (!annotation.empty()) {
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%.1f\" y=\"%.1f\" font-family=\"sans-serif\" "
                  "font-size=\"13\" fill=\"#333333\">%s</text>\n",
                  ml + 14, mt + 18, annotation.c_str());
    s += buf;
  }
  s += "</svg>\n";
  return s;
}

}  // namespace relaydof

#endif  // RELAYDOF_SVG_HPP
