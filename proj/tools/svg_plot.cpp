// Copyright 2026 The ICDA Authors
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

#include "svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include "csv.hpp"

namespace icda::cli {
namespace {

constexpr double kWidth = 640;
constexpr double kHeight = 420;
constexpr double kLeft = 70;
constexpr double kRight = 150;  // legend column
constexpr double kTop = 40;
constexpr double kBottom = 55;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#17becf", "#8c564b", "#e377c2"};

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fixed(double v, int digits = 2) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << v;
  return os.str();
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void pad() {
    if (!std::isfinite(lo)) {
      lo = 0;
      hi = 1;
    }
    if (hi - lo < 1e-12) {
      lo -= 0.5;
      hi += 0.5;
    }
    const double m = 0.04 * (hi - lo);
    lo -= m;
    hi += m;
  }
};

}  // namespace

std::string render_svg(const PlotSpec& spec, const std::vector<Series>& series) {
  Range xr, yr;
  for (const auto& s : series) {
    for (double v : s.x) xr.add(v);
    for (double v : s.y) yr.add(v);
  }
  if (spec.y_zero_line) yr.add(*spec.y_zero_line);
  xr.pad();
  yr.pad();
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
  auto py = [&](double y) { return kTop + (1.0 - (y - yr.lo) / (yr.hi - yr.lo)) * ph; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
     << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kLeft + pw / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
     << xml_escape(spec.title) << "</text>\n";
  os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\""
     << ph << "\" fill=\"none\" stroke=\"#444\"/>\n";

  for (int i = 0; i <= 5; ++i) {
    const double xv = xr.lo + (xr.hi - xr.lo) * i / 5.0;
    const double yv = yr.lo + (yr.hi - yr.lo) * i / 5.0;
    os << "<line x1=\"" << px(xv) << "\" y1=\"" << kTop + ph << "\" x2=\"" << px(xv)
       << "\" y2=\"" << kTop + ph + 5 << "\" stroke=\"#444\"/>";
    os << "<text x=\"" << px(xv) << "\" y=\"" << kTop + ph + 18
       << "\" text-anchor=\"middle\">" << fixed(xv) << "</text>\n";
    os << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << py(yv) << "\" x2=\"" << kLeft
       << "\" y2=\"" << py(yv) << "\" stroke=\"#444\"/>";
    os << "<text x=\"" << kLeft - 8 << "\" y=\"" << py(yv) + 4
       << "\" text-anchor=\"end\">" << fixed(yv, 3) << "</text>\n";
  }
  os << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 12
     << "\" text-anchor=\"middle\">" << xml_escape(spec.x_label) << "</text>\n";
  os << "<text transform=\"translate(16," << kTop + ph / 2
     << ") rotate(-90)\" text-anchor=\"middle\">" << xml_escape(spec.y_label)
     << "</text>\n";

  if (spec.identity_line) {
    const double lo = std::max(xr.lo, yr.lo);
    const double hi = std::min(xr.hi, yr.hi);
    if (hi > lo) {
      os << "<line x1=\"" << px(lo) << "\" y1=\"" << py(lo) << "\" x2=\"" << px(hi)
         << "\" y2=\"" << py(hi) << "\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>\n";
    }
  }
  if (spec.y_zero_line) {
    const double y = *spec.y_zero_line;
    os << "<line x1=\"" << kLeft << "\" y1=\"" << py(y) << "\" x2=\"" << kLeft + pw
       << "\" y2=\"" << py(y) << "\" stroke=\"#999\" stroke-dasharray=\"2 2\"/>\n";
  }

  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    const char* color = kPalette[i % std::size(kPalette)];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.6\"";
    if (s.dashed) os << " stroke-dasharray=\"6 3\"";
    os << " points=\"";
    for (std::size_t j = 0; j < s.x.size() && j < s.y.size(); ++j) {
      if (!std::isfinite(s.x[j]) || !std::isfinite(s.y[j])) continue;
      os << px(s.x[j]) << ',' << py(s.y[j]) << ' ';
    }
    os << "\"/>\n";
    if (s.markers) {
      for (std::size_t j = 0; j < s.x.size() && j < s.y.size(); ++j) {
        if (!std::isfinite(s.x[j]) || !std::isfinite(s.y[j])) continue;
        os << "<circle cx=\"" << px(s.x[j]) << "\" cy=\"" << py(s.y[j])
           << "\" r=\"2.5\" fill=\"" << color << "\"/>";
      }
      os << '\n';
    }
    const double ly = kTop + 14 + 18.0 * static_cast<double>(i);
    os << "<line x1=\"" << kWidth - kRight + 12 << "\" y1=\"" << ly - 4 << "\" x2=\""
       << kWidth - kRight + 32 << "\" y2=\"" << ly - 4 << "\" stroke=\"" << color
       << "\" stroke-width=\"2\"/>";
    os << "<text x=\"" << kWidth - kRight + 38 << "\" y=\"" << ly << "\">"
       << xml_escape(s.name) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

void write_svg(const std::filesystem::path& path, const PlotSpec& spec,
               const std::vector<Series>& series) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << render_svg(spec, series);
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::vector<Series> series_from_csv(const std::filesystem::path& csv,
                                    const std::string& x_col, const std::string& y_col,
                                    const std::string& group_col) {
  const CsvTable table = read_csv(csv);
  const auto xs = table.numbers(x_col);
  const auto ys = table.numbers(y_col);
  if (group_col.empty()) return {Series{y_col, xs, ys}};
  const auto groups = table.strings(group_col);
  std::vector<Series> out;
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    auto [it, inserted] = index.emplace(groups[i], out.size());
    if (inserted) out.push_back(Series{group_col + "=" + groups[i], {}, {}});
    out[it->second].x.push_back(xs[i]);
    out[it->second].y.push_back(ys[i]);
  }
  return out;
}

}  // namespace icda::cli
