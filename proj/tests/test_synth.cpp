#include <cmath>
#include <vector>

#include "doctest.h"
#include "rotodet/geometry.hpp"
#include "rotodet/synth.hpp"

using namespace rdet;

TEST_CASE("a single noiseless object paints its interior cells to 1") {
  SceneSpec spec;
  spec.min_objects = 1;
  spec.max_objects = 1;
  spec.feature_noise = 0.0;
  Scene scene = gen_scene(spec, 99);
  REQUIRE(scene.gts.size() == 1);
  CHECK(scene.features.width == spec.image_size / spec.stride);

  int interior = 0;
  for (int iy = 0; iy < scene.features.height; ++iy) {
    for (int ix = 0; ix < scene.features.width; ++ix) {
      const Vec2 p{(ix + 0.5) * spec.stride, (iy + 0.5) * spec.stride};
      const double expect = point_in_box(p, scene.gts[0]) ? 1.0 : 0.0;
      for (int c = 0; c < kFeatureChannels; ++c) {
        CHECK(scene.features.at(c, ix, iy) == expect);
      }
      if (expect == 1.0) ++interior;
    }
  }
  CHECK(interior > 0);
}

TEST_CASE("scene generation is deterministic under a fixed seed") {
  SceneSpec spec;
  spec.feature_noise = 0.1;
  Scene a = gen_scene(spec, 1234);
  Scene b = gen_scene(spec, 1234);
  REQUIRE(a.gts.size() == b.gts.size());
  for (size_t i = 0; i < a.gts.size(); ++i) {
    CHECK(a.gts[i].cx == b.gts[i].cx);
    CHECK(a.gts[i].cy == b.gts[i].cy);
    CHECK(a.gts[i].theta_deg == b.gts[i].theta_deg);
  }
  CHECK(a.features.values == b.features.values);

  Scene c = gen_scene(spec, 1235);
  CHECK(a.features.values != c.features.values);
}

TEST_CASE("generated boxes satisfy invariants, bounds, and separation") {
  SceneSpec spec;
  spec.min_objects = 4;
  spec.max_objects = 5;
  for (uint64_t seed = 0; seed < 30; ++seed) {
    Scene scene = gen_scene(spec, seed);
    for (size_t i = 0; i < scene.gts.size(); ++i) {
      const RotatedBox& b = scene.gts[i];
      CHECK(b.w <= b.h);
      CHECK(b.theta_deg > -90.0);
      CHECK(b.theta_deg <= 90.0);
      AxisBox box = aabb(b);
      CHECK(box.xmin >= -1e-9);
      CHECK(box.ymin >= -1e-9);
      CHECK(box.xmax <= spec.image_size + 1e-9);
      CHECK(box.ymax <= spec.image_size + 1e-9);
      for (size_t j = i + 1; j < scene.gts.size(); ++j) {
        CHECK(iou_rotated(b, scene.gts[j]) < 0.1);
      }
    }
  }
}

TEST_CASE("box size and angle moments match the spec distributions") {
  SceneSpec spec;
  spec.min_objects = 2;
  spec.max_objects = 2;
  spec.stride = 64;  // coarse grid: this test only consumes the boxes
  double w_sum = 0, h_sum = 0, t_sum = 0;
  std::vector<double> ws, hs, ts;
  const int scenes = 2000;
  for (int i = 0; i < scenes; ++i) {
    Scene s = gen_scene(spec, 10000 + static_cast<uint64_t>(i));
    for (const RotatedBox& b : s.gts) {
      ws.push_back(b.w);
      hs.push_back(b.h);
      ts.push_back(b.theta_deg);
      w_sum += b.w;
      h_sum += b.h;
      t_sum += b.theta_deg;
    }
  }
  const double n = static_cast<double>(ws.size());
  const double w_mean = w_sum / n, h_mean = h_sum / n, t_mean = t_sum / n;
  // Uniform(a, b): mean (a+b)/2, sd (b-a)/sqrt(12); sample-mean sd = sd/sqrt(n).
  const double w_tol = 3.0 * (spec.w_max - spec.w_min) / std::sqrt(12.0 * n);
  const double h_tol = 3.0 * (spec.h_max - spec.h_min) / std::sqrt(12.0 * n);
  const double t_tol = 3.0 * 180.0 / std::sqrt(12.0 * n);
  CHECK(std::abs(w_mean - 0.5 * (spec.w_min + spec.w_max)) < w_tol);
  CHECK(std::abs(h_mean - 0.5 * (spec.h_min + spec.h_max)) < h_tol);
  CHECK(std::abs(t_mean - 0.0) < t_tol);
}

TEST_CASE("gen_detections with no noise reproduces the ground truths") {
  SceneSpec spec;
  spec.center_sigma = 0;
  spec.size_sigma = 0;
  spec.angle_sigma_deg = 0;
  spec.drop_rate = 0;
  spec.clutter_rate = 0;
  Scene scene = gen_scene(spec, 31);
  Rng rng(32);
  std::vector<ScoredBox> dets = gen_detections(scene.gts, spec, rng);
  REQUIRE(dets.size() == scene.gts.size());
  for (size_t i = 0; i < dets.size(); ++i) {
    CHECK(dets[i].box.cx == doctest::Approx(scene.gts[i].cx));
    CHECK(dets[i].box.cy == doctest::Approx(scene.gts[i].cy));
    CHECK(dets[i].box.w == doctest::Approx(scene.gts[i].w));
    CHECK(dets[i].box.h == doctest::Approx(scene.gts[i].h));
    CHECK(dets[i].box.theta_deg == doctest::Approx(scene.gts[i].theta_deg));
    CHECK(dets[i].score >= 0.7);
    CHECK(dets[i].score <= 1.0);
  }
}

TEST_CASE("drop rate 1 leaves only clutter") {
  SceneSpec spec;
  spec.drop_rate = 1.0;
  spec.clutter_rate = 0.5;
  spec.min_objects = 4;
  spec.max_objects = 4;
  Scene scene = gen_scene(spec, 33);
  Rng rng(34);
  std::vector<ScoredBox> dets = gen_detections(scene.gts, spec, rng);
  for (const ScoredBox& d : dets) CHECK(d.score <= 0.4);
}

TEST_CASE("angle noise shows up with the configured spread") {
  SceneSpec spec;
  spec.min_objects = 2;
  spec.max_objects = 2;
  spec.stride = 64;
  spec.angle_sigma_deg = 5.0;
  spec.center_sigma = 0;
  spec.size_sigma = 0;
  Rng rng(35);
  std::vector<double> deltas;
  for (int i = 0; i < 1000; ++i) {
    Scene s = gen_scene(spec, 40000 + static_cast<uint64_t>(i));
    std::vector<ScoredBox> dets = gen_detections(s.gts, spec, rng);
    REQUIRE(dets.size() == s.gts.size());
    for (size_t j = 0; j < dets.size(); ++j) {
      deltas.push_back(wrap_angle_deg(dets[j].box.theta_deg - s.gts[j].theta_deg));
    }
  }
  double mean = 0;
  for (double d : deltas) mean += d;
  mean /= static_cast<double>(deltas.size());
  double var = 0;
  for (double d : deltas) var += (d - mean) * (d - mean);
  var /= static_cast<double>(deltas.size() - 1);
  const double sd = std::sqrt(var);
  // Sample sd of a normal: sd ~ sigma +- 3 * sigma / sqrt(2n).
  CHECK(std::abs(sd - 5.0) < 3.0 * 5.0 / std::sqrt(2.0 * static_cast<double>(deltas.size())));
}

TEST_CASE("sequences: stationary objects repeat, moving centers are collinear") {
  SceneSpec spec;
  spec.min_objects = 2;
  spec.max_objects = 2;
  spec.stride = 64;
  MotionSpec still{0.0, 0.0};
  std::vector<FrameData> frames = gen_sequence(spec, 5, still, 77);
  REQUIRE(frames.size() == 5);
  for (const FrameData& f : frames) {
    REQUIRE(f.gts.size() == frames[0].gts.size());
    for (size_t i = 0; i < f.gts.size(); ++i) {
      CHECK(f.gts[i].cx == frames[0].gts[i].cx);
      CHECK(f.gts[i].cy == frames[0].gts[i].cy);
    }
  }

  MotionSpec moving{1.0, 1.0};
  std::vector<FrameData> seq = gen_sequence(spec, 6, moving, 78);
  for (size_t obj = 0; obj < seq[0].gts.size(); ++obj) {
    // Collinearity of the first few centers (before any reflection).
    const Vec2 p0{seq[0].gts[obj].cx, seq[0].gts[obj].cy};
    const Vec2 p1{seq[1].gts[obj].cx, seq[1].gts[obj].cy};
    const Vec2 p2{seq[2].gts[obj].cx, seq[2].gts[obj].cy};
    const double crossv = (p1.x - p0.x) * (p2.y - p0.y) - (p1.y - p0.y) * (p2.x - p0.x);
    const double step1 = std::hypot(p1.x - p0.x, p1.y - p0.y);
    if (step1 > 0 && std::abs(p2.x - 2 * p1.x + p0.x) < 1e-9 &&
        std::abs(p2.y - 2 * p1.y + p0.y) < 1e-9) {
      CHECK(std::abs(crossv) < 1e-9);
      CHECK(step1 == doctest::Approx(1.0));
    }
  }

  std::vector<FrameData> again = gen_sequence(spec, 6, moving, 78);
  for (size_t f = 0; f < seq.size(); ++f) {
    REQUIRE(again[f].dets.size() == seq[f].dets.size());
    for (size_t i = 0; i < seq[f].dets.size(); ++i) {
      CHECK(again[f].dets[i].box.cx == seq[f].dets[i].box.cx);
      CHECK(again[f].dets[i].score == seq[f].dets[i].score);
    }
  }
}
