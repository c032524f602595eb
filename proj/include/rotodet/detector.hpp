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
//
// Two-stage oriented detection head on top of the toy 1x1 model. Stage 1
// scores and regresses anchor templates; its decoded quads become rotated
// proposals (via minimum-area rectangles); stage 2 rescored and refines the
// proposals into final boxes.

#ifndef ROTODET_DETECTOR_HPP_
#define ROTODET_DETECTOR_HPP_

#include <array>
#include <string>
#include <vector>

#include "rotodet/anchors.hpp"
#include "rotodet/boxcodec.hpp"
#include "rotodet/losses.hpp"
#include "rotodet/pooling.hpp"

namespace rdet {

struct DetectorConfig {
  AnchorConfig anchor_cfg{{-45.0, 0.0, 45.0, 90.0}, {0.5, 1.0, 2.0}, 4.0, 1, 1};
  int rpn_proposals{128};    // proposals handed to stage 2
  int rdn_keep{100};         // detections kept before NMS
  double nms_iou{0.3};
  double score_threshold{0.05};
  double pos_iou{0.5};
  double neg_iou{0.3};
};

// One frozen classification term: the RoI's pixel-to-bin assignment, the
// label, and the term's weight inside its stage loss.
struct FrozenClsTerm {
  BinAssignment bins;
  int target_class{0};
  double weight{1.0};
};

struct FrozenRegTerm {
  BinAssignment bins;
  std::array<double, 8> target{};
  double weight{1.0};
};

// A scene's computation graph with all box geometry frozen: the loss becomes
// a smooth function of the model parameters alone (bin memberships do not
// depend on the maps, and no frozen term has an empty bin).
struct FrozenScene {
  DenseMaps features;
  std::vector<FrozenClsTerm> cls1, cls2;
  std::vector<FrozenRegTerm> reg1, reg2;
};

// Anchor bank scaled onto the feature grid: one cell per feature pixel,
// template sizes in feature units (image stats divided by cfg.stride). All
// detector-internal boxes (anchors, proposals, ground truths, detections)
// live in feature units; callers convert image-pixel boxes by dividing
// centers and sides by the stride, and scale detections back up.
AnchorSet feature_grid_anchors(const AnchorConfig& cfg, const BoxSizeStats& image_stats,
                               int grid_w, int grid_h);

FrozenScene build_frozen_scene(const DenseMaps& features, const std::vector<RotatedBox>& gts,
                               const ToyModel& model, const AnchorSet& anchors,
                               const DetectorConfig& cfg, const HyperParams& hp, Rng& rng);

struct StageLosses {
  double l1{0};
  double l2{0};
};

StageLosses frozen_loss(const FrozenScene& scene, const ToyModel& model);

// Loss plus analytic gradients of (L1 + eta * L2) accumulated into `grads`
// (the decay term is not included; see sgd_step / grad_check).
StageLosses frozen_loss_and_grad(const FrozenScene& scene, const ToyModel& model, double eta,
                                 ModelGrads& grads);

struct GradCheckReport {
  double max_rel_error{0};
  double max_abs_error{0};
  int params_checked{0};
};

// Central finite differences of the joint objective over `sample_params`
// randomly chosen parameters, against the analytic gradient.
GradCheckReport grad_check(const std::vector<FrozenScene>& scenes, const ToyModel& model,
                           const HyperParams& hp, int sample_params, double step, Rng& rng);

// Full two-stage inference on one feature grid. Anchor sizing comes from
// `stats` (training-set means at deployment time).
std::vector<ScoredBox> detect_scene(const DenseMaps& features, const ToyModel& model,
                                    const BoxSizeStats& stats, const DetectorConfig& cfg);

}  // namespace rdet

#endif  // ROTODET_DETECTOR_HPP_
