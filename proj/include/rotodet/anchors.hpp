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

#ifndef ROTODET_ANCHORS_HPP_
#define ROTODET_ANCHORS_HPP_

#include <vector>

#include "rotodet/geometry.hpp"

namespace rdet {

// Anchor template bank: every (angle, scale) pair is laid over every cell of
// the feature grid, giving grid_w * grid_h * |angles| * |scales| anchors.
struct AnchorConfig {
  std::vector<double> angles_deg{-45.0, 0.0, 45.0, 90.0};
  std::vector<double> scales{0.5, 1.0, 2.0};
  double stride{16.0};  // image pixels per feature cell
  int grid_w{1};
  int grid_h{1};
};

// Mean ground-truth box size over a batch, used to size the anchor templates.
struct BoxSizeStats {
  double w_mean{0.0};
  double h_mean{0.0};
  long long count{0};
};

struct Anchor {
  RotatedBox box;
  int cell_row{0};
  int cell_col{0};
  int angle_index{0};
  int scale_index{0};
};

struct AnchorSet {
  AnchorConfig cfg;
  BoxSizeStats stats;
  std::vector<Anchor> anchors;
};

// Equal-weight mean of (w, h) over all boxes of all images in the batch.
// Throws when the batch holds no boxes at all.
BoxSizeStats size_stats(const std::vector<std::vector<RotatedBox>>& batch);

// One canonical box of size (scale * w_mean, scale * h_mean) per cell center
// and (angle, scale) pair. Cell centers sit at ((col + 0.5), (row + 0.5)) *
// stride. Anchors may extend outside the image; nothing is clipped.
AnchorSet generate_anchors(const AnchorConfig& cfg, const BoxSizeStats& stats);

}  // namespace rdet

#endif  // ROTODET_ANCHORS_HPP_
