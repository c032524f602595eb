// Copyright 2026 The rotodet Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "rotodet/anchors.hpp"

#include "rotodet/error.hpp"

namespace rdet {

BoxSizeStats size_stats(const std::vector<std::vector<RotatedBox>>& batch) {
  double w_sum = 0.0, h_sum = 0.0;
  long long n = 0;
  for (const auto& image : batch) {
    for (const RotatedBox& box : image) {
      w_sum += box.w;
      h_sum += box.h;
      ++n;
    }
  }
  require(n > 0, Errc::invalid_argument, "batch contains no ground-truth boxes");
  return BoxSizeStats{w_sum / static_cast<double>(n), h_sum / static_cast<double>(n), n};
}

AnchorSet generate_anchors(const AnchorConfig& cfg, const BoxSizeStats& stats) {
  require(cfg.stride > 0.0, Errc::invalid_argument, "stride must be positive");
  require(cfg.grid_w >= 1 && cfg.grid_h >= 1, Errc::invalid_argument,
          "grid dimensions must be at least 1");
  require(!cfg.angles_deg.empty() && !cfg.scales.empty(), Errc::invalid_argument,
          "angle and scale lists must be non-empty");
  require(stats.w_mean > 0.0 && stats.h_mean > 0.0, Errc::invalid_argument,
          "size stats must be positive");

  AnchorSet set;
  set.cfg = cfg;
  set.stats = stats;
  set.anchors.reserve(static_cast<size_t>(cfg.grid_w) * static_cast<size_t>(cfg.grid_h) *
                      cfg.angles_deg.size() * cfg.scales.size());
  for (int row = 0; row < cfg.grid_h; ++row) {
    for (int col = 0; col < cfg.grid_w; ++col) {
      const double cx = (col + 0.5) * cfg.stride;
      const double cy = (row + 0.5) * cfg.stride;
      for (size_t ai = 0; ai < cfg.angles_deg.size(); ++ai) {
        for (size_t si = 0; si < cfg.scales.size(); ++si) {
          const double k = cfg.scales[si];
          Anchor a;
          a.box = canonicalize(cx, cy, k * stats.w_mean, k * stats.h_mean, cfg.angles_deg[ai]);
          a.cell_row = row;
          a.cell_col = col;
          a.angle_index = static_cast<int>(ai);
          a.scale_index = static_cast<int>(si);
          set.anchors.push_back(a);
        }
      }
    }
  }
  return set;
}

}  // namespace rdet
