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
// Detection-vs-ground-truth metrics. Overlap is measured on the axis-aligned
// conversions of the oriented boxes; matching is greedy in descending score
// order with at most one detection per ground truth (PASCAL style).

#ifndef ROTODET_EVALUATION_HPP_
#define ROTODET_EVALUATION_HPP_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rotodet/geometry.hpp"

namespace rdet {

struct Detection {
  std::string image_id;
  RotatedBox box;
  double score{0};
  std::string cls;  // optional; empty for single-class evaluation
};

struct GroundTruth {
  std::string image_id;
  RotatedBox box;
  std::string cls;
};

struct MatchResult {
  std::vector<uint8_t> det_is_tp;  // per detection, input order
  std::vector<int> det_gt;         // matched ground-truth index or -1
  std::vector<uint8_t> gt_matched;
  long long tp{0}, fp{0}, fn{0};
};

MatchResult match_detections(const std::vector<Detection>& dets,
                             const std::vector<GroundTruth>& gts, double iou_threshold);

// TP/(TP+FP) and TP/(TP+FN). Empty denominators: precision is 1 with no
// detections, recall is 0 with no ground truths.
std::pair<double, double> precision_recall(long long tp, long long fp, long long fn);

// 2PR/(P+R), 0 when both are 0.
double f1_score(double precision, double recall);

// All-points interpolation: monotone precision envelope integrated over
// recall, sweeping the score threshold over every detection score.
double average_precision(const std::vector<Detection>& dets,
                         const std::vector<GroundTruth>& gts, double iou_threshold);

// Per-class AP averaged over the classes present in the ground truth.
double mean_average_precision(const std::vector<Detection>& dets,
                              const std::vector<GroundTruth>& gts, double iou_threshold);

struct EvalSummary {
  double ap{0};
  double best_f1{0};
  long long tp{0}, fp{0}, fn{0};
};

struct EvalCurve {
  std::vector<double> x;
  std::vector<double> y;
  EvalSummary summary;
};

// Precision-recall curve (x = recall, y = envelope precision at distinct
// recall levels). The summary carries AP, the best F1 over score cutoffs,
// and the counts with every detection admitted.
EvalCurve precision_recall_curve(const std::vector<Detection>& dets,
                                 const std::vector<GroundTruth>& gts, double iou_threshold);

// Recall at each IoU threshold of a strictly increasing grid in (0, 1], at a
// fixed score cutoff. The summary holds the counts at the grid point nearest
// to IoU 0.5.
EvalCurve recall_iou_curve(const std::vector<Detection>& dets,
                           const std::vector<GroundTruth>& gts,
                           const std::vector<double>& iou_grid, double score_cutoff = 0.0);

// Normalized histogram of angular deviations of true positives, wrapped into
// (-90, 90] modulo 180. Bins are centered on multiples of bin_width.
struct AngleHistogram {
  double bin_width{5.0};
  std::vector<double> centers;
  std::vector<double> mass;
  long long samples{0};

  double mass_within(double limit_deg) const;
};

AngleHistogram orientation_deviation(const std::vector<Detection>& dets,
                                     const std::vector<GroundTruth>& gts, double iou_threshold,
                                     double bin_width = 5.0);

}  // namespace rdet

#endif  // ROTODET_EVALUATION_HPP_
