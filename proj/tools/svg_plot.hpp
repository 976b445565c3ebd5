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

// Minimal SVG line charts. Input always comes from a CSV on disk.

#ifndef ICDA_TOOLS_SVG_PLOT_HPP_
#define ICDA_TOOLS_SVG_PLOT_HPP_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace icda::cli {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  bool markers = false;
  bool dashed = false;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  // Draws y = x across the visible range.
  bool identity_line = false;
  std::optional<double> y_zero_line;
};

std::string render_svg(const PlotSpec& spec, const std::vector<Series>& series);

void write_svg(const std::filesystem::path& path, const PlotSpec& spec,
               const std::vector<Series>& series);

// One series per distinct value of group_col, or a single series when
// group_col is empty.
std::vector<Series> series_from_csv(const std::filesystem::path& csv,
                                    const std::string& x_col,
                                    const std::string& y_col,
                                    const std::string& group_col = "");

}  // namespace icda::cli

#endif  // ICDA_TOOLS_SVG_PLOT_HPP_
