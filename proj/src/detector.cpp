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

#include "rotodet/detector.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rotodet/error.hpp"

namespace rdet {

namespace {

std::vector<double> one_hot(int cls, int num_classes) {
  std::vector<double> v(static_cast<size_t>(num_classes), 0.0);
  v[static_cast<size_t>(cls)] = 1.0;
  return v;
}

// Pooled class probabilities for one frozen term.
std::vector<double> term_probs(const FrozenClsTerm& term, const DenseMaps& cls_maps,
                               int num_classes) {
  PooledBins bins = pool_class_bins(cls_maps, term.bins, num_classes);
  return softmax(vote(bins));
}

std::array<double, 8> term_offsets(const FrozenRegTerm& term, const DenseMaps& reg_maps) {
  return pool_offset_bins(reg_maps, term.bins);
}

VertexOffsets to_vertex_offsets(const std::array<double, 8>& dims) {
  VertexOffsets t;
  for (int d = 0; d < 8; ++d) t.set_dim(d, dims[static_cast<size_t>(d)]);
  return t;
}

std::array<double, 8> to_dims(const VertexOffsets& t) {
  std::array<double, 8> out{};
  for (int d = 0; d < 8; ++d) out[static_cast<size_t>(d)] = t.dim(d);
  return out;
}

// Scatters d(loss)/d(pooled bin value) back onto a gradient map stack.
void scatter_bin_grad(DenseMaps& grad_maps, const BinAssignment& bins, int channel_base, int bin,
                      double grad) {
  const int count = bins.counts[static_cast<size_t>(bin)];
  if (count <= 0) return;  // frozen terms never have empty bins
  const double per_pixel = grad / count;
  for (const auto& px : bins.pixels) {
    if (px[2] == bin) grad_maps.at(channel_base + bin, px[0], px[1]) += per_pixel;
  }
}

struct Proposal {
  RotatedBox box;
  double score{0};
};

// Stage-1 scoring + decoding shared by training and inference. Anchors whose
// bins cannot be filled are scored through the bilinear fallback only when
// `allow_fallback` is set; otherwise they are skipped.
std::vector<Proposal> propose(const DenseMaps& cls_maps, const DenseMaps& reg_maps,
                              const AnchorSet& anchors, const DetectorConfig& cfg,
                              int num_classes, bool allow_fallback) {
  struct Scored {
    int index;
    double score;
    BinAssignment bins;
  };
  std::vector<Scored> scored;
  scored.reserve(anchors.anchors.size());
  for (size_t i = 0; i < anchors.anchors.size(); ++i) {
    BinAssignment bins;
    try {
      bins = assign_bins(cls_maps.width, cls_maps.height, anchors.anchors[i].box);
    } catch (const Error&) {
      continue;  // anchor entirely off the map
    }
    if (!allow_fallback && bins.any_empty()) continue;
    PooledBins pooled = pool_class_bins(cls_maps, bins, num_classes);
    const std::vector<double> probs = softmax(vote(pooled));
    scored.push_back({static_cast<int>(i), probs[1], std::move(bins)});
  }
  const size_t keep = std::min<size_t>(scored.size(), static_cast<size_t>(cfg.rpn_proposals));
  std::partial_sort(scored.begin(), scored.begin() + static_cast<long>(keep), scored.end(),
                    [](const Scored& a, const Scored& b) {
                      return a.score > b.score || (a.score == b.score && a.index < b.index);
                    });
  scored.resize(keep);

  std::vector<Proposal> proposals;
  proposals.reserve(scored.size());
  for (const Scored& s : scored) {
    const Anchor& anchor = anchors.anchors[static_cast<size_t>(s.index)];
    const double k = anchors.cfg.scales[static_cast<size_t>(anchor.scale_index)];
    const double kw = k * anchors.stats.w_mean;
    const double kh = k * anchors.stats.h_mean;
    const std::array<double, 8> dims = pool_offset_bins(reg_maps, s.bins);
    const QuadBox decoded =
        decode(to_quad(anchor.box), to_vertex_offsets(dims), kw, kh);
    std::vector<Vec2> pts;
    for (int i = 0; i < 4; ++i) pts.push_back(decoded.vertex(i));
    try {
      proposals.push_back({min_area_rect(pts), s.score});
    } catch (const Error&) {
      // Degenerate decode; keep the anchor itself as the proposal.
      proposals.push_back({anchor.box, s.score});
    }
  }
  return proposals;
}

}  // namespace

FrozenScene build_frozen_scene(const DenseMaps& features, const std::vector<RotatedBox>& gts,
                               const ToyModel& model, const AnchorSet& anchors,
                               const DetectorConfig& cfg, const HyperParams& hp, Rng& rng) {
  FrozenScene scene;
  scene.features = features;
  if (gts.empty()) return scene;  // decay-only objective

  std::vector<RotatedBox> anchor_boxes;
  anchor_boxes.reserve(anchors.anchors.size());
  for (const Anchor& a : anchors.anchors) anchor_boxes.push_back(a.box);
  const MatchLabels labels = match_anchors(anchor_boxes, gts, cfg.pos_iou, cfg.neg_iou);

  const std::vector<int> sampled = sample_minibatch(labels, hp.n_cls, rng);
  for (int idx : sampled) {
    const Anchor& anchor = anchors.anchors[static_cast<size_t>(idx)];
    BinAssignment bins;
    try {
      bins = assign_bins(features.width, features.height, anchor.box);
    } catch (const Error&) {
      continue;
    }
    if (bins.any_empty()) continue;  // no gradient through the fallback path

    const bool positive = labels.label[static_cast<size_t>(idx)] == AnchorLabel::positive;
    scene.cls1.push_back({bins, positive ? 1 : 0, 1.0 / hp.n_cls});
    if (positive) {
      const double k = anchors.cfg.scales[static_cast<size_t>(anchor.scale_index)];
      const double kw = k * anchors.stats.w_mean;
      const double kh = k * anchors.stats.h_mean;
      const RotatedBox& gt = gts[static_cast<size_t>(labels.gt_index[static_cast<size_t>(idx)])];
      const VertexOffsets target = encode(to_quad(anchor.box), to_quad(gt), kw, kh);
      scene.reg1.push_back({std::move(bins), to_dims(target), hp.lambda1 / hp.n_reg});
    }
  }

  // Stage 2 trains on the current model's proposals.
  const DenseMaps cls_maps = model.cls_maps(features);
  const DenseMaps reg_maps = model.reg_maps(features);
  const std::vector<Proposal> proposals =
      propose(cls_maps, reg_maps, anchors, cfg, model.num_classes, /*allow_fallback=*/false);

  for (const Proposal& p : proposals) {
    BinAssignment bins;
    try {
      bins = assign_bins(features.width, features.height, p.box);
    } catch (const Error&) {
      continue;
    }
    if (bins.any_empty()) continue;

    double best = 0.0;
    int best_j = -1;
    for (size_t j = 0; j < gts.size(); ++j) {
      const double iou = iou_axis(p.box, gts[j]);
      if (iou > best) {
        best = iou;
        best_j = static_cast<int>(j);
      }
    }
    const bool positive = best >= cfg.pos_iou;
    scene.cls2.push_back({bins, positive ? 1 : 0, 1.0});
    if (positive) {
      const VertexOffsets target =
          encode(to_quad(p.box), to_quad(gts[static_cast<size_t>(best_j)]), p.box.w, p.box.h);
      scene.reg2.push_back({std::move(bins), to_dims(target), hp.lambda2});
    }
  }
  return scene;
}

StageLosses frozen_loss(const FrozenScene& scene, const ToyModel& model) {
  StageLosses out;
  const DenseMaps cls_maps = model.cls_maps(scene.features);
  const DenseMaps reg_maps = model.reg_maps(scene.features);
  for (const FrozenClsTerm& t : scene.cls1) {
    out.l1 += t.weight * cross_entropy(term_probs(t, cls_maps, model.num_classes),
                                       one_hot(t.target_class, model.num_classes));
  }
  for (const FrozenRegTerm& t : scene.reg1) {
    out.l1 += t.weight * offsets_loss(term_offsets(t, reg_maps), t.target);
  }
  for (const FrozenClsTerm& t : scene.cls2) {
    out.l2 += t.weight * cross_entropy(term_probs(t, cls_maps, model.num_classes),
                                       one_hot(t.target_class, model.num_classes));
  }
  for (const FrozenRegTerm& t : scene.reg2) {
    out.l2 += t.weight * offsets_loss(term_offsets(t, reg_maps), t.target);
  }
  return out;
}

StageLosses frozen_loss_and_grad(const FrozenScene& scene, const ToyModel& model, double eta,
                                 ModelGrads& grads) {
  StageLosses out;
  const DenseMaps cls_maps = model.cls_maps(scene.features);
  const DenseMaps reg_maps = model.reg_maps(scene.features);
  DenseMaps g_cls = DenseMaps::zeros(cls_maps.width, cls_maps.height, cls_maps.channels);
  DenseMaps g_reg = DenseMaps::zeros(reg_maps.width, reg_maps.height, reg_maps.channels);
  const int num_classes = model.num_classes;

  auto backprop_cls = [&](const FrozenClsTerm& t, double stage_scale, double& loss_acc) {
    PooledBins bins = pool_class_bins(cls_maps, t.bins, num_classes);
    const std::vector<double> probs = softmax(vote(bins));
    loss_acc += t.weight * cross_entropy(probs, one_hot(t.target_class, num_classes));
    for (int c = 0; c < num_classes; ++c) {
      // d(CE)/d(vote_c) through the softmax; every bin of class c shares it.
      const double g =
          t.weight * stage_scale * (probs[static_cast<size_t>(c)] - (c == t.target_class ? 1.0 : 0.0));
      for (int bin = 0; bin < kBins; ++bin) {
        scatter_bin_grad(g_cls, t.bins, kBins * c, bin, g);
      }
    }
  };
  auto backprop_reg = [&](const FrozenRegTerm& t, double stage_scale, double& loss_acc) {
    const std::array<double, 8> pred = pool_offset_bins(reg_maps, t.bins);
    loss_acc += t.weight * offsets_loss(pred, t.target);
    for (int d = 0; d < kOffsetDims; ++d) {
      const double g = t.weight * stage_scale *
                       smooth_l1_grad(pred[static_cast<size_t>(d)] - t.target[static_cast<size_t>(d)]) /
                       kBins;
      for (int bin = 0; bin < kBins; ++bin) {
        scatter_bin_grad(g_reg, t.bins, kBins * d, bin, g);
      }
    }
  };

  for (const FrozenClsTerm& t : scene.cls1) backprop_cls(t, 1.0, out.l1);
  for (const FrozenRegTerm& t : scene.reg1) backprop_reg(t, 1.0, out.l1);
  for (const FrozenClsTerm& t : scene.cls2) backprop_cls(t, eta, out.l2);
  for (const FrozenRegTerm& t : scene.reg2) backprop_reg(t, eta, out.l2);

  // Map gradients -> parameter gradients of the 1x1 linear heads.
  const size_t plane =
      static_cast<size_t>(scene.features.width) * static_cast<size_t>(scene.features.height);
  auto reduce = [&](const DenseMaps& gmaps, std::vector<double>& gw, std::vector<double>& gb) {
    for (int ch = 0; ch < gmaps.channels; ++ch) {
      const double* g = gmaps.values.data() + static_cast<size_t>(ch) * plane;
      double gsum = 0.0;
      for (size_t i = 0; i < plane; ++i) gsum += g[i];
      gb[static_cast<size_t>(ch)] += gsum;
      for (int f = 0; f < scene.features.channels; ++f) {
        const double* x = scene.features.values.data() + static_cast<size_t>(f) * plane;
        double acc = 0.0;
        for (size_t i = 0; i < plane; ++i) acc += g[i] * x[i];
        gw[static_cast<size_t>(ch) * static_cast<size_t>(scene.features.channels) +
           static_cast<size_t>(f)] += acc;
      }
    }
  };
  reduce(g_cls, grads.w_cls, grads.b_cls);
  reduce(g_reg, grads.w_reg, grads.b_reg);
  return out;
}

GradCheckReport grad_check(const std::vector<FrozenScene>& scenes, const ToyModel& model,
                           const HyperParams& hp, int sample_params, double step, Rng& rng) {
  ModelGrads analytic = ModelGrads::zeros_like(model);
  for (const FrozenScene& s : scenes) frozen_loss_and_grad(s, model, hp.eta, analytic);
  for (size_t i = 0; i < analytic.param_count(); ++i) {
    analytic.add_param(i, 2.0 * hp.phi_decay * model.param(i));
  }

  auto objective = [&](const ToyModel& m) {
    double total = 0.0;
    for (const FrozenScene& s : scenes) {
      const StageLosses l = frozen_loss(s, m);
      total += l.l1 + hp.eta * l.l2;
    }
    return total + hp.phi_decay * m.squared_norm();
  };

  GradCheckReport report;
  ToyModel probe = model;
  const size_t n = model.param_count();
  for (int k = 0; k < sample_params; ++k) {
    const size_t i = static_cast<size_t>(rng.next_u64() % n);
    const double w0 = probe.param(i);
    probe.set_param(i, w0 + step);
    const double fp = objective(probe);
    probe.set_param(i, w0 - step);
    const double fm = objective(probe);
    probe.set_param(i, w0);
    const double fd = (fp - fm) / (2.0 * step);
    const double a = analytic.param(i);
    const double abs_err = std::abs(a - fd);
    const double rel = abs_err / std::max({std::abs(a), std::abs(fd), 1e-4});
    report.max_abs_error = std::max(report.max_abs_error, abs_err);
    report.max_rel_error = std::max(report.max_rel_error, rel);
    ++report.params_checked;
  }
  return report;
}

AnchorSet feature_grid_anchors(const AnchorConfig& cfg, const BoxSizeStats& image_stats,
                               int grid_w, int grid_h) {
  AnchorConfig grid_cfg = cfg;
  grid_cfg.grid_w = grid_w;
  grid_cfg.grid_h = grid_h;
  grid_cfg.stride = 1.0;  // one cell per feature pixel
  const BoxSizeStats feat_stats{image_stats.w_mean / cfg.stride, image_stats.h_mean / cfg.stride,
                                image_stats.count};
  return generate_anchors(grid_cfg, feat_stats);
}

std::vector<ScoredBox> detect_scene(const DenseMaps& features, const ToyModel& model,
                                    const BoxSizeStats& stats, const DetectorConfig& cfg) {
  const AnchorSet anchors =
      feature_grid_anchors(cfg.anchor_cfg, stats, features.width, features.height);

  const DenseMaps cls_maps = model.cls_maps(features);
  const DenseMaps reg_maps = model.reg_maps(features);
  const std::vector<Proposal> proposals =
      propose(cls_maps, reg_maps, anchors, cfg, model.num_classes, /*allow_fallback=*/true);

  std::vector<ScoredBox> refined;
  refined.reserve(proposals.size());
  for (const Proposal& p : proposals) {
    BinAssignment bins;
    try {
      bins = assign_bins(features.width, features.height, p.box);
    } catch (const Error&) {
      continue;
    }
    PooledBins pooled = pool_class_bins(cls_maps, bins, model.num_classes);
    const double score = softmax(vote(pooled))[1];
    const std::array<double, 8> dims = pool_offset_bins(reg_maps, bins);
    RotatedBox box = p.box;
    try {
      const QuadBox decoded = decode(to_quad(p.box), to_vertex_offsets(dims), p.box.w, p.box.h);
      std::vector<Vec2> pts;
      for (int i = 0; i < 4; ++i) pts.push_back(decoded.vertex(i));
      box = min_area_rect(pts);
    } catch (const Error&) {
      // Keep the unrefined proposal.
    }
    refined.push_back({box, score});
  }

  std::stable_sort(refined.begin(), refined.end(),
                   [](const ScoredBox& a, const ScoredBox& b) { return a.score > b.score; });
  if (refined.size() > static_cast<size_t>(cfg.rdn_keep)) {
    refined.resize(static_cast<size_t>(cfg.rdn_keep));
  }

  const std::vector<int> kept = nms_rotated(refined, cfg.nms_iou);
  std::vector<ScoredBox> out;
  out.reserve(kept.size());
  for (int idx : kept) {
    if (refined[static_cast<size_t>(idx)].score >= cfg.score_threshold) {
      out.push_back(refined[static_cast<size_t>(idx)]);
    }
  }
  return out;
}

}  // namespace rdet
