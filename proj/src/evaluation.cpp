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

#include "rotodet/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "rotodet/error.hpp"

namespace rdet {

namespace {

std::vector<int> score_order(const std::vector<Detection>& dets) {
  std::vector<int> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return dets[static_cast<size_t>(a)].score > dets[static_cast<size_t>(b)].score;
  });
  return order;
}

bool compatible(const Detection& d, const GroundTruth& g) {
  return d.image_id == g.image_id && d.cls == g.cls;
}

}  // namespace

MatchResult match_detections(const std::vector<Detection>& dets,
                             const std::vector<GroundTruth>& gts, double iou_threshold) {
  MatchResult r;
  r.det_is_tp.assign(dets.size(), 0);
  r.det_gt.assign(dets.size(), -1);
  r.gt_matched.assign(gts.size(), 0);

  std::vector<AxisBox> gt_boxes;
  gt_boxes.reserve(gts.size());
  for (const GroundTruth& g : gts) gt_boxes.push_back(aabb(g.box));

  for (int di : score_order(dets)) {
    const Detection& d = dets[static_cast<size_t>(di)];
    const AxisBox db = aabb(d.box);
    double best = 0.0;
    int best_j = -1;
    for (size_t j = 0; j < gts.size(); ++j) {
      if (r.gt_matched[j] || !compatible(d, gts[j])) continue;
      const double iou = iou_axis(db, gt_boxes[j]);
      if (iou > best) {
        best = iou;
        best_j = static_cast<int>(j);
      }
    }
    if (best_j >= 0 && best >= iou_threshold) {
      r.det_is_tp[static_cast<size_t>(di)] = 1;
      r.det_gt[static_cast<size_t>(di)] = best_j;
      r.gt_matched[static_cast<size_t>(best_j)] = 1;
      ++r.tp;
    } else {
      ++r.fp;
    }
  }
  r.fn = static_cast<long long>(gts.size()) - r.tp;
  return r;
}

std::pair<double, double> precision_recall(long long tp, long long fp, long long fn) {
  const double precision = (tp + fp) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp)
                                         : 1.0;
  const double recall = (tp + fn) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn)
                                      : 0.0;
  return {precision, recall};
}

double f1_score(double precision, double recall) {
  require(precision >= 0.0 && precision <= 1.0 && recall >= 0.0 && recall <= 1.0,
          Errc::invalid_argument, "precision/recall must lie in [0, 1]");
  if (precision + recall <= 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

namespace {

// Ranked TP flags (descending score) -> all-points envelope integral.
double envelope_ap(const std::vector<uint8_t>& ranked_tp, long long n_gts) {
  if (n_gts <= 0) return 0.0;
  const size_t n = ranked_tp.size();
  std::vector<double> precision(n), recall(n);
  long long tp = 0;
  for (size_t i = 0; i < n; ++i) {
    tp += ranked_tp[i];
    precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
    recall[i] = static_cast<double>(tp) / static_cast<double>(n_gts);
  }
  // Monotone envelope from the right.
  for (size_t i = n; i-- > 1;) precision[i - 1] = std::max(precision[i - 1], precision[i]);
  double ap = 0.0;
  double prev_recall = 0.0;
  for (size_t i = 0; i < n; ++i) {
    ap += (recall[i] - prev_recall) * precision[i];
    prev_recall = recall[i];
  }
  return ap;
}

std::vector<uint8_t> ranked_tp_flags(const std::vector<Detection>& dets,
                                     const std::vector<GroundTruth>& gts, double iou_threshold) {
  const MatchResult m = match_detections(dets, gts, iou_threshold);
  std::vector<uint8_t> ranked;
  ranked.reserve(dets.size());
  for (int di : score_order(dets)) ranked.push_back(m.det_is_tp[static_cast<size_t>(di)]);
  return ranked;
}

}  // namespace

double average_precision(const std::vector<Detection>& dets,
                         const std::vector<GroundTruth>& gts, double iou_threshold) {
  return envelope_ap(ranked_tp_flags(dets, gts, iou_threshold),
                     static_cast<long long>(gts.size()));
}

double mean_average_precision(const std::vector<Detection>& dets,
                              const std::vector<GroundTruth>& gts, double iou_threshold) {
  std::set<std::string> classes;
  for (const GroundTruth& g : gts) classes.insert(g.cls);
  require(!classes.empty(), Errc::invalid_argument, "no ground truths");
  double total = 0.0;
  for (const std::string& cls : classes) {
    std::vector<Detection> cd;
    std::vector<GroundTruth> cg;
    for (const Detection& d : dets) {
      if (d.cls == cls) cd.push_back(d);
    }
    for (const GroundTruth& g : gts) {
      if (g.cls == cls) cg.push_back(g);
    }
    total += average_precision(cd, cg, iou_threshold);
  }
  return total / static_cast<double>(classes.size());
}

EvalCurve precision_recall_curve(const std::vector<Detection>& dets,
                                 const std::vector<GroundTruth>& gts, double iou_threshold) {
  const std::vector<uint8_t> ranked = ranked_tp_flags(dets, gts, iou_threshold);
  const long long n_gts = static_cast<long long>(gts.size());

  EvalCurve curve;
  long long tp = 0;
  double best_f1 = 0.0;
  std::vector<double> precision(ranked.size()), recall(ranked.size());
  for (size_t i = 0; i < ranked.size(); ++i) {
    tp += ranked[i];
    precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
    recall[i] = n_gts > 0 ? static_cast<double>(tp) / static_cast<double>(n_gts) : 0.0;
    best_f1 = std::max(best_f1, f1_score(precision[i], recall[i]));
  }
  for (size_t i = ranked.size(); i-- > 1;) {
    precision[i - 1] = std::max(precision[i - 1], precision[i]);
  }
  // One point per distinct recall level (the envelope precision there).
  for (size_t i = 0; i < ranked.size(); ++i) {
    if (i + 1 < ranked.size() && recall[i + 1] == recall[i]) continue;
    curve.x.push_back(recall[i]);
    curve.y.push_back(precision[i]);
  }
  curve.summary.ap = envelope_ap(ranked, n_gts);
  curve.summary.best_f1 = best_f1;
  curve.summary.tp = tp;
  curve.summary.fp = static_cast<long long>(ranked.size()) - tp;
  curve.summary.fn = n_gts - tp;
  return curve;
}

EvalCurve recall_iou_curve(const std::vector<Detection>& dets,
                           const std::vector<GroundTruth>& gts,
                           const std::vector<double>& iou_grid, double score_cutoff) {
  require(!iou_grid.empty(), Errc::invalid_argument, "empty IoU grid");
  for (size_t i = 0; i < iou_grid.size(); ++i) {
    require(iou_grid[i] > 0.0 && iou_grid[i] <= 1.0, Errc::invalid_argument,
            "IoU grid values must lie in (0, 1]");
    if (i > 0) {
      require(iou_grid[i] > iou_grid[i - 1], Errc::invalid_argument,
              "IoU grid must be strictly increasing");
    }
  }
  std::vector<Detection> admitted;
  for (const Detection& d : dets) {
    if (d.score >= score_cutoff) admitted.push_back(d);
  }

  EvalCurve curve;
  double best_dist = 2.0;
  for (double thr : iou_grid) {
    const MatchResult m = match_detections(admitted, gts, thr);
    const auto [p, r] = precision_recall(m.tp, m.fp, m.fn);
    curve.x.push_back(thr);
    curve.y.push_back(r);
    const double dist = std::abs(thr - 0.5);
    if (dist < best_dist) {
      best_dist = dist;
      curve.summary.tp = m.tp;
      curve.summary.fp = m.fp;
      curve.summary.fn = m.fn;
      curve.summary.best_f1 = f1_score(p, r);
    }
  }
  curve.summary.ap = 0.0;  // not meaningful for this curve
  return curve;
}

double AngleHistogram::mass_within(double limit_deg) const {
  double total = 0.0;
  for (size_t i = 0; i < centers.size(); ++i) {
    if (std::abs(centers[i]) <= limit_deg + 1e-12) total += mass[i];
  }
  return total;
}

AngleHistogram orientation_deviation(const std::vector<Detection>& dets,
                                     const std::vector<GroundTruth>& gts, double iou_threshold,
                                     double bin_width) {
  require(bin_width > 0.0 && bin_width <= 180.0, Errc::invalid_argument,
          "bin width out of range");
  const MatchResult m = match_detections(dets, gts, iou_threshold);

  const int k_max = static_cast<int>(std::ceil(90.0 / bin_width - 0.5 - 1e-12));
  AngleHistogram hist;
  hist.bin_width = bin_width;
  for (int k = -k_max; k <= k_max; ++k) hist.centers.push_back(k * bin_width);
  hist.mass.assign(hist.centers.size(), 0.0);

  for (size_t di = 0; di < dets.size(); ++di) {
    if (!m.det_is_tp[di]) continue;
    const GroundTruth& g = gts[static_cast<size_t>(m.det_gt[di])];
    const double delta = wrap_angle_deg(dets[di].box.theta_deg - g.box.theta_deg);
    int k = static_cast<int>(std::lround(delta / bin_width));
    k = std::clamp(k, -k_max, k_max);
    hist.mass[static_cast<size_t>(k + k_max)] += 1.0;
    ++hist.samples;
  }
  if (hist.samples > 0) {
    for (double& v : hist.mass) v /= static_cast<double>(hist.samples);
  }
  return hist;
}

}  // namespace rdet
