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

#ifndef ROTODET_BOXCODEC_HPP_
#define ROTODET_BOXCODEC_HPP_

#include <array>
#include <cstdint>
#include <vector>

#include "rotodet/anchors.hpp"
#include "rotodet/geometry.hpp"
#include "rotodet/random.hpp"

namespace rdet {

// Per-vertex regression offsets: t_x = (target_x - anchor_x) / kw, likewise
// for y with kh. Both quads must be collated so vertices correspond.
struct VertexOffsets {
  std::array<double, 4> tx{};
  std::array<double, 4> ty{};

  double dim(int d) const { return d < 4 ? tx[static_cast<size_t>(d)] : ty[static_cast<size_t>(d - 4)]; }
  void set_dim(int d, double v) {
    if (d < 4) {
      tx[static_cast<size_t>(d)] = v;
    } else {
      ty[static_cast<size_t>(d - 4)] = v;
    }
  }
};

VertexOffsets encode(const QuadBox& anchor, const QuadBox& target, double kw, double kh);
QuadBox decode(const QuadBox& anchor, const VertexOffsets& t, double kw, double kh);

enum class AnchorLabel : int8_t {
  background = 0,
  positive = 1,
  ignore = -1,  // overlap between neg_threshold and pos_threshold
};

struct MatchLabels {
  std::vector<AnchorLabel> label;
  std::vector<int> gt_index;  // argmax-IoU ground truth, -1 when none overlaps
  std::vector<double> max_iou;
  std::vector<uint8_t> reg_mask;  // 1 exactly for positive anchors

  size_t size() const { return label.size(); }
};

// Labels anchors by axis-aligned IoU against the ground truths: positive at
// max IoU >= pos_threshold, background below neg_threshold, ignored between.
// Ties on the argmax break toward the lowest ground-truth index.
MatchLabels match_anchors(const std::vector<RotatedBox>& anchors,
                          const std::vector<RotatedBox>& gts, double pos_threshold = 0.5,
                          double neg_threshold = 0.3);

// Samples up to n_cls anchors for the classification term at a 1:3
// positive:negative ratio. Ignored anchors are never sampled.
std::vector<int> sample_minibatch(const MatchLabels& labels, int n_cls, Rng& rng,
                                  double pos_fraction = 0.25);

}  // namespace rdet

#endif  // ROTODET_BOXCODEC_HPP_
