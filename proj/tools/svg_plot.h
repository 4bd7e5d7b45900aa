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

#ifndef DEBIAS_TOOLS_SVG_PLOT_H_
#define DEBIAS_TOOLS_SVG_PLOT_H_

#include <string>
#include <vector>

namespace debias::cli {

struct Series {
  std::string label;
  std::string color;
  std::vector<double> x;
  std::vector<double> y;
};

struct Panel {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;
  std::vector<Series> series;
};

// Stacks the panels vertically as simple line charts. `comment` is embedded
// verbatim as an XML comment (it must not contain "--").
std::string RenderSvg(const std::vector<Panel>& panels,
                      const std::string& comment);

}  // namespace debias::cli

#endif  // DEBIAS_TOOLS_SVG_PLOT_H_
