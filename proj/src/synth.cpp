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

#include "rotodet/synth.hpp"

#include <algorithm>
#include <cmath>

#include "rotodet/error.hpp"

namespace rdet {

namespace {

constexpr int kPlacementRetries = 200;
constexpr double kMaxMutualIou = 0.1;

void validate(const SceneSpec& spec) {
  require(spec.image_size >= 8 && spec.stride >= 1, Errc::invalid_argument,
          "image_size/stride out of range");
  require(spec.min_objects >= 0 && spec.max_objects >= spec.min_objects, Errc::invalid_argument,
          "object count range is invalid");
  require(spec.w_min > 0 && spec.w_max >= spec.w_min && spec.h_min > 0 && spec.h_max >= spec.h_min,
          Errc::invalid_argument, "size ranges must be positive");
  require(spec.drop_rate >= 0 && spec.drop_rate <= 1 && spec.clutter_rate >= 0 &&
              spec.clutter_rate <= 1,
          Errc::invalid_argument, "rates must lie in [0, 1]");
}

RotatedBox sample_box(const SceneSpec& spec, Rng& rng) {
  double w = rng.uniform(spec.w_min, spec.w_max);
  double h = rng.uniform(spec.h_min, spec.h_max);
  if (w > h) std::swap(w, h);
  const double theta = wrap_angle_deg(rng.uniform(-90.0, 90.0));
  const double margin = 0.5 * std::hypot(w, h);
  require(2.0 * margin < spec.image_size, Errc::invalid_argument,
          "objects are too large for the image");
  const double cx = rng.uniform(margin, spec.image_size - margin);
  const double cy = rng.uniform(margin, spec.image_size - margin);
  return canonicalize(cx, cy, w, h, theta);
}

std::vector<RotatedBox> place_objects(const SceneSpec& spec, Rng& rng) {
  const int count = spec.max_objects == spec.min_objects
                        ? spec.min_objects
                        : rng.uniform_int(spec.min_objects, spec.max_objects);
  std::vector<RotatedBox> gts;
  for (int i = 0; i < count; ++i) {
    bool placed = false;
    for (int attempt = 0; attempt < kPlacementRetries && !placed; ++attempt) {
      RotatedBox candidate = sample_box(spec, rng);
      bool clear = true;
      for (const RotatedBox& other : gts) {
        if (iou_rotated(candidate, other) >= kMaxMutualIou) {
          clear = false;
          break;
        }
      }
      if (clear) {
        gts.push_back(candidate);
        placed = true;
      }
    }
    require(placed, Errc::numeric, "failed to place a non-overlapping object");
  }
  return gts;
}

}  // namespace

Scene gen_scene(const SceneSpec& spec, uint64_t seed) {
  validate(spec);
  Rng rng(seed);
  Scene scene;
  scene.gts = place_objects(spec, rng);

  const int gw = spec.image_size / spec.stride;
  const int gh = spec.image_size / spec.stride;
  scene.features = DenseMaps::zeros(gw, gh, kFeatureChannels);
  for (int c = 0; c < kFeatureChannels; ++c) {
    for (int iy = 0; iy < gh; ++iy) {
      for (int ix = 0; ix < gw; ++ix) {
        const Vec2 p{(ix + 0.5) * spec.stride, (iy + 0.5) * spec.stride};
        double value = 0.0;
        for (const RotatedBox& b : scene.gts) {
          if (point_in_box(p, b)) {
            value = 1.0;
            break;
          }
        }
        if (spec.feature_noise > 0.0) value += spec.feature_noise * rng.normal();
        scene.features.at(c, ix, iy) = value;
      }
    }
  }
  return scene;
}

std::vector<ScoredBox> gen_detections(const std::vector<RotatedBox>& gts, const SceneSpec& spec,
                                      Rng& rng) {
  validate(spec);
  std::vector<ScoredBox> dets;
  for (const RotatedBox& gt : gts) {
    if (rng.uniform() < spec.drop_rate) continue;
    const double w = std::max(1.0, gt.w + spec.size_sigma * rng.normal());
    const double h = std::max(1.0, gt.h + spec.size_sigma * rng.normal());
    RotatedBox box = canonicalize(gt.cx + spec.center_sigma * rng.normal(),
                                  gt.cy + spec.center_sigma * rng.normal(), w, h,
                                  gt.theta_deg + spec.angle_sigma_deg * rng.normal());
    dets.push_back({box, rng.uniform(0.7, 1.0)});
  }
  for (size_t i = 0; i < gts.size(); ++i) {
    if (rng.uniform() < spec.clutter_rate) {
      dets.push_back({sample_box(spec, rng), rng.uniform(0.0, 0.4)});
    }
  }
  return dets;
}

std::vector<FrameData> gen_sequence(const SceneSpec& spec, int frames, const MotionSpec& motion,
                                    uint64_t seed) {
  validate(spec);
  require(frames >= 1, Errc::invalid_argument, "need at least one frame");
  require(motion.speed_min >= 0 && motion.speed_max >= motion.speed_min, Errc::invalid_argument,
          "speed range is invalid");
  Rng rng(seed);
  std::vector<RotatedBox> boxes = place_objects(spec, rng);
  std::vector<Vec2> vel(boxes.size());
  for (Vec2& v : vel) {
    const double speed = rng.uniform(motion.speed_min, motion.speed_max);
    const double dir = rng.uniform(0.0, 2.0 * M_PI);
    v = {speed * std::cos(dir), speed * std::sin(dir)};
  }

  std::vector<FrameData> out;
  out.reserve(static_cast<size_t>(frames));
  for (int f = 0; f < frames; ++f) {
    FrameData frame;
    frame.frame = f;
    frame.gts = boxes;
    frame.dets = gen_detections(boxes, spec, rng);
    out.push_back(std::move(frame));

    for (size_t i = 0; i < boxes.size(); ++i) {
      RotatedBox& b = boxes[i];
      const double margin = 0.5 * std::hypot(b.w, b.h);
      double nx = b.cx + vel[i].x;
      double ny = b.cy + vel[i].y;
      if (nx < margin) {
        nx = 2.0 * margin - nx;
        vel[i].x = -vel[i].x;
      } else if (nx > spec.image_size - margin) {
        nx = 2.0 * (spec.image_size - margin) - nx;
        vel[i].x = -vel[i].x;
      }
      if (ny < margin) {
        ny = 2.0 * margin - ny;
        vel[i].y = -vel[i].y;
      } else if (ny > spec.image_size - margin) {
        ny = 2.0 * (spec.image_size - margin) - ny;
        vel[i].y = -vel[i].y;
      }
      b.cx = nx;
      b.cy = ny;
    }
  }
  return out;
}

}  // namespace rdet
