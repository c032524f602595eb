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

#include "rotodet/boxcodec.hpp"

#include <algorithm>

#include "rotodet/error.hpp"

namespace rdet {

namespace {

// Re-collates a rectangle quad; non-rectangular quads (regression outputs)
// are returned unchanged since the collation rule only applies to rectangles.
QuadBox recollate(const QuadBox& q) {
  try {
    return to_quad(from_quad(q));
  } catch (const Error&) {
    return q;
  }
}

}  // namespace

VertexOffsets encode(const QuadBox& anchor, const QuadBox& target, double kw, double kh) {
  require(kw > 0.0 && kh > 0.0, Errc::invalid_argument, "normalizers must be positive");
  const QuadBox a = recollate(anchor);
  const QuadBox g = recollate(target);
  VertexOffsets t;
  for (size_t i = 0; i < 4; ++i) {
    t.tx[i] = (g.xs[i] - a.xs[i]) / kw;
    t.ty[i] = (g.ys[i] - a.ys[i]) / kh;
  }
  return t;
}

QuadBox decode(const QuadBox& anchor, const VertexOffsets& t, double kw, double kh) {
  require(kw > 0.0 && kh > 0.0, Errc::invalid_argument, "normalizers must be positive");
  const QuadBox a = recollate(anchor);
  QuadBox out;
  for (size_t i = 0; i < 4; ++i) {
    out.xs[i] = a.xs[i] + t.tx[i] * kw;
    out.ys[i] = a.ys[i] + t.ty[i] * kh;
  }
  return out;
}

MatchLabels match_anchors(const std::vector<RotatedBox>& anchors,
                          const std::vector<RotatedBox>& gts, double pos_threshold,
                          double neg_threshold) {
  require(pos_threshold > 0.0 && pos_threshold < 1.0, Errc::invalid_argument,
          "pos_threshold must lie in (0, 1)");
  require(neg_threshold >= 0.0 && neg_threshold <= pos_threshold, Errc::invalid_argument,
          "neg_threshold must lie in [0, pos_threshold]");

  std::vector<AxisBox> gt_aabb;
  gt_aabb.reserve(gts.size());
  for (const RotatedBox& g : gts) gt_aabb.push_back(aabb(g));

  MatchLabels out;
  out.label.resize(anchors.size(), AnchorLabel::background);
  out.gt_index.resize(anchors.size(), -1);
  out.max_iou.resize(anchors.size(), 0.0);
  out.reg_mask.resize(anchors.size(), 0);

  for (size_t i = 0; i < anchors.size(); ++i) {
    const AxisBox a = aabb(anchors[i]);
    double best = 0.0;
    int best_j = -1;
    for (size_t j = 0; j < gts.size(); ++j) {
      const double iou = iou_axis(a, gt_aabb[j]);
      if (iou > best) {
        best = iou;
        best_j = static_cast<int>(j);
      }
    }
    out.max_iou[i] = best;
    if (best > 0.0) out.gt_index[i] = best_j;
    if (best >= pos_threshold) {
      out.label[i] = AnchorLabel::positive;
      out.reg_mask[i] = 1;
    } else if (best >= neg_threshold) {
      out.label[i] = AnchorLabel::ignore;
    }
  }
  return out;
}

std::vector<int> sample_minibatch(const MatchLabels& labels, int n_cls, Rng& rng,
                                  double pos_fraction) {
  require(n_cls >= 1, Errc::invalid_argument, "n_cls must be at least 1");
  std::vector<int> pos, neg;
  for (size_t i = 0; i < labels.size(); ++i) {
    if (labels.label[i] == AnchorLabel::positive) {
      pos.push_back(static_cast<int>(i));
    } else if (labels.label[i] == AnchorLabel::background) {
      neg.push_back(static_cast<int>(i));
    }
  }
  auto shuffle = [&rng](std::vector<int>& v) {
    for (int i = static_cast<int>(v.size()) - 1; i > 0; --i) {
      std::swap(v[static_cast<size_t>(i)], v[static_cast<size_t>(rng.uniform_int(0, i))]);
    }
  };
  shuffle(pos);
  shuffle(neg);

  const int max_pos = std::max(1, static_cast<int>(n_cls * pos_fraction));
  const int n_pos = std::min<int>(static_cast<int>(pos.size()), max_pos);
  const int n_neg = std::min<int>(static_cast<int>(neg.size()), n_cls - n_pos);

  std::vector<int> sampled(pos.begin(), pos.begin() + n_pos);
  sampled.insert(sampled.end(), neg.begin(), neg.begin() + n_neg);
  std::sort(sampled.begin(), sampled.end());
  return sampled;
}

}  // namespace rdet
