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

#ifndef ROTODET_SYNTH_HPP_
#define ROTODET_SYNTH_HPP_

#include <cstdint>
#include <vector>

#include "rotodet/geometry.hpp"
#include "rotodet/pooling.hpp"
#include "rotodet/random.hpp"

namespace rdet {

inline constexpr int kFeatureChannels = 2;

// Synthetic scene recipe. Boxes are placed without mutual overlap (rotated
// IoU < 0.1) and fully inside the image; the feature grid is the stride-
// downsampled box-interior indicator plus Gaussian noise.
struct SceneSpec {
  int image_size{128};
  int min_objects{1};
  int max_objects{5};
  double w_min{8.0}, w_max{16.0};
  double h_min{20.0}, h_max{40.0};
  // Detection noise model.
  double center_sigma{1.0};
  double size_sigma{1.0};
  double angle_sigma_deg{5.0};
  double drop_rate{0.0};
  double clutter_rate{0.0};
  // Feature noise (per channel, per cell).
  double feature_noise{0.05};
  int stride{4};
  uint64_t seed{0};
};

struct Scene {
  std::vector<RotatedBox> gts;  // image pixels
  DenseMaps features;           // image_size / stride grid, kFeatureChannels channels
};

Scene gen_scene(const SceneSpec& spec, uint64_t seed);

// Ground truths perturbed by the spec's noise model (dropped at drop_rate,
// scored Uniform(0.7, 1)) plus clutter boxes scored Uniform(0, 0.4).
std::vector<ScoredBox> gen_detections(const std::vector<RotatedBox>& gts, const SceneSpec& spec,
                                      Rng& rng);

struct MotionSpec {
  double speed_min{0.5};
  double speed_max{2.0};  // pixels per frame
};

struct FrameData {
  int frame{0};
  std::vector<RotatedBox> gts;
  std::vector<ScoredBox> dets;
};

// Constant-velocity motion with reflective boundaries; object order (and so
// identity) is stable across frames.
std::vector<FrameData> gen_sequence(const SceneSpec& spec, int frames, const MotionSpec& motion,
                                    uint64_t seed);

}  // namespace rdet

#endif  // ROTODET_SYNTH_HPP_
