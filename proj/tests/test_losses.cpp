#include <array>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "rotodet/detector.hpp"
#include "rotodet/error.hpp"
#include "rotodet/losses.hpp"
#include "rotodet/synth.hpp"

using namespace rdet;

TEST_CASE("cross_entropy basics") {
  CHECK(cross_entropy({0.0, 1.0}, {0.0, 1.0}) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(cross_entropy({0.5, 0.5}, {0.0, 1.0}) == doctest::Approx(std::log(2.0)));
  CHECK(cross_entropy({0.5, 0.5}, {1.0, 0.0}) == doctest::Approx(std::log(2.0)));
  // Clamped log keeps saturated predictions finite.
  CHECK(std::isfinite(cross_entropy({1.0, 0.0}, {0.0, 1.0})));
  CHECK_THROWS_AS(cross_entropy({0.9, 0.3}, {1.0, 0.0}), Error);
}

TEST_CASE("softmax cross-entropy gradient matches finite differences") {
  Rng rng(401);
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<double> logits{rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3)};
    const int target = rng.uniform_int(0, 2);
    std::vector<double> p_hat(3, 0.0);
    p_hat[static_cast<size_t>(target)] = 1.0;

    const std::vector<double> probs = softmax(logits);
    for (int i = 0; i < 3; ++i) {
      const double analytic = probs[static_cast<size_t>(i)] - p_hat[static_cast<size_t>(i)];
      const double fd = oracles::central_diff(
          [&](double x) {
            std::vector<double> l = logits;
            l[static_cast<size_t>(i)] = x;
            return cross_entropy(softmax(l), p_hat);
          },
          logits[static_cast<size_t>(i)], 1e-6);
      CHECK(std::abs(analytic - fd) / std::max(1.0, std::abs(analytic)) < 1e-5);
    }
  }
}

TEST_CASE("smooth_l1 values, continuity, and gradient") {
  CHECK(smooth_l1(0.0) == doctest::Approx(0.0));
  CHECK(smooth_l1(0.5) == doctest::Approx(0.125));
  CHECK(smooth_l1(2.0) == doctest::Approx(1.5));
  CHECK(smooth_l1(-2.0) == doctest::Approx(1.5));
  // Both branches give 0.5 at |x| = 1.
  CHECK(smooth_l1(std::nextafter(1.0, 0.0)) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(smooth_l1(1.0) == doctest::Approx(0.5));
  CHECK(smooth_l1_grad(1.0) == doctest::Approx(1.0));
  CHECK(smooth_l1_grad(-1.0) == doctest::Approx(-1.0));

  Rng rng(403);
  for (int trial = 0; trial < 50; ++trial) {
    const double x = rng.uniform(-3, 3);
    if (std::abs(std::abs(x) - 1.0) < 1e-3) continue;  // FD is unreliable at the kink
    const double fd = oracles::central_diff([](double v) { return smooth_l1(v); }, x, 1e-6);
    CHECK(std::abs(smooth_l1_grad(x) - fd) < 1e-6);
  }
}

TEST_CASE("stage1_loss composes classification and regression terms") {
  HyperParams hp;
  // Perfect predictions give zero loss.
  std::vector<ClsExample> cls{{std::vector<double>{0.0, 1.0}, std::vector<double>{0.0, 1.0}}};
  std::vector<RegExample> reg{{{}, {}, true}};
  CHECK(stage1_loss(cls, reg, hp) == doctest::Approx(0.0).epsilon(1e-9));

  // A single positive anchor with a unit error in one coordinate.
  RegExample unit;
  unit.active = true;
  unit.pred[0] = 1.0;
  CHECK(stage1_loss({}, {unit}, hp) == doctest::Approx(hp.lambda1 * 0.5 / hp.n_reg));

  // Inactive examples do not contribute.
  unit.active = false;
  CHECK(stage1_loss({}, {unit}, hp) == doctest::Approx(0.0));
}

TEST_CASE("stage losses match a straightforward two-pass summation oracle") {
  Rng rng(405);
  HyperParams hp;
  hp.lambda1 = 7.0;
  hp.lambda2 = 3.0;
  std::vector<ClsExample> cls;
  std::vector<RegExample> reg;
  for (int i = 0; i < 40; ++i) {
    const double p = rng.uniform(0.01, 0.99);
    const bool positive = rng.uniform() < 0.5;
    cls.push_back({{1.0 - p, p}, positive ? std::vector<double>{0.0, 1.0}
                                          : std::vector<double>{1.0, 0.0}});
    RegExample e;
    e.active = rng.uniform() < 0.5;
    for (int d = 0; d < 8; ++d) {
      e.pred[static_cast<size_t>(d)] = rng.uniform(-2, 2);
      e.target[static_cast<size_t>(d)] = rng.uniform(-2, 2);
    }
    reg.push_back(e);
  }

  double cls_sum = 0.0, reg_sum = 0.0;
  for (const ClsExample& e : cls) {
    cls_sum -= std::log(std::max(e.one_hot[1] > 0.5 ? e.probs[1] : e.probs[0], 1e-12));
  }
  for (const RegExample& e : reg) {
    if (!e.active) continue;
    for (int d = 0; d < 8; ++d) {
      const double x = e.pred[static_cast<size_t>(d)] - e.target[static_cast<size_t>(d)];
      reg_sum += std::abs(x) < 1 ? 0.5 * x * x : std::abs(x) - 0.5;
    }
  }
  CHECK(stage1_loss(cls, reg, hp) ==
        doctest::Approx(cls_sum / hp.n_cls + hp.lambda1 * reg_sum / hp.n_reg).epsilon(1e-12));
  CHECK(stage2_loss(cls, reg, hp) ==
        doctest::Approx(cls_sum + hp.lambda2 * reg_sum).epsilon(1e-12));
}

TEST_CASE("joint_loss adds the weighted stages and the decay term") {
  Rng rng(406);
  ToyModel m = ToyModel::random_init(2, 2, rng);
  HyperParams hp;
  hp.phi_decay = 0.0;
  CHECK(joint_loss({}, {}, m, hp) == doctest::Approx(0.0));

  // L1 = 1, L2 = 2, eta = 1, ||w||^2 = 4, phi = 0.0005 -> 3.002.
  ToyModel unitw = m;
  for (size_t i = 0; i < unitw.param_count(); ++i) unitw.set_param(i, 0.0);
  unitw.set_param(0, 2.0);  // ||w||^2 = 4
  hp.phi_decay = 0.0005;
  hp.eta = 1.0;
  CHECK(joint_loss({1.0}, {2.0}, unitw, hp) == doctest::Approx(3.002));

  // Additivity over a mini-batch partition.
  std::vector<double> l1, l2;
  for (int i = 0; i < 12; ++i) {
    l1.push_back(rng.uniform(0, 2));
    l2.push_back(rng.uniform(0, 2));
  }
  const double whole = joint_loss(l1, l2, m, hp);
  std::vector<double> l1a(l1.begin(), l1.begin() + 5), l1b(l1.begin() + 5, l1.end());
  std::vector<double> l2a(l2.begin(), l2.begin() + 7), l2b(l2.begin() + 7, l2.end());
  const double split = joint_loss(l1a, l2a, m, hp) + joint_loss(l1b, l2b, m, hp) -
                       hp.phi_decay * m.squared_norm();
  CHECK(std::abs(whole - split) < 1e-9);
}

TEST_CASE("sgd_step basics") {
  Rng rng(407);
  ToyModel m = ToyModel::random_init(1, 2, rng);
  HyperParams hp;
  hp.phi_decay = 0.0;
  hp.momentum = 0.0;

  ToyModel before = m;
  ModelGrads zero = ModelGrads::zeros_like(m);
  SgdState state;
  sgd_step(m, zero, state, hp, 0.1);
  for (size_t i = 0; i < m.param_count(); ++i) CHECK(m.param(i) == before.param(i));

  // Scalar case: w = 1, grad = 0.5, lr = 0.1 -> 0.95.
  m.set_param(3, 1.0);
  ModelGrads g = ModelGrads::zeros_like(m);
  g.add_param(3, 0.5);
  sgd_step(m, g, state, hp, 0.1);
  CHECK(m.param(3) == doctest::Approx(0.95));
}

TEST_CASE("sgd_step minimizes a convex quadratic") {
  Rng rng(409);
  ToyModel m = ToyModel::random_init(1, 2, rng, 1.0);
  HyperParams hp;
  hp.phi_decay = 0.0;
  hp.momentum = 0.0;
  const size_t n = m.param_count();
  std::vector<double> curvature(n), optimum(n);
  for (size_t i = 0; i < n; ++i) {
    curvature[i] = rng.uniform(0.5, 1.0);
    optimum[i] = rng.uniform(-2, 2);
  }
  SgdState state;
  for (int step = 0; step < 200; ++step) {
    ModelGrads g = ModelGrads::zeros_like(m);
    for (size_t i = 0; i < n; ++i) g.add_param(i, 2.0 * curvature[i] * (m.param(i) - optimum[i]));
    sgd_step(m, g, state, hp, 0.3);
  }
  for (size_t i = 0; i < n; ++i) CHECK(std::abs(m.param(i) - optimum[i]) < 1e-6);

  // Momentum run reaches the optimum as well.
  ToyModel m2 = ToyModel::random_init(1, 2, rng, 1.0);
  hp.momentum = 0.9;
  SgdState state2;
  for (int step = 0; step < 600; ++step) {
    ModelGrads g = ModelGrads::zeros_like(m2);
    for (size_t i = 0; i < n; ++i) g.add_param(i, 2.0 * curvature[i] * (m2.param(i) - optimum[i]));
    sgd_step(m2, g, state2, hp, 0.05);
  }
  for (size_t i = 0; i < n; ++i) CHECK(std::abs(m2.param(i) - optimum[i]) < 1e-6);
}

namespace {

FrozenScene frozen_from_synth(uint64_t seed, const ToyModel& model, const DetectorConfig& cfg,
                              const HyperParams& hp) {
  SceneSpec spec;
  spec.image_size = 64;
  spec.min_objects = 1;
  spec.max_objects = 3;
  spec.feature_noise = 0.05;
  Scene scene = gen_scene(spec, seed);
  std::vector<RotatedBox> feat_gts;
  for (const RotatedBox& g : scene.gts) {
    feat_gts.push_back(canonicalize(g.cx / spec.stride, g.cy / spec.stride, g.w / spec.stride,
                                    g.h / spec.stride, g.theta_deg));
  }
  AnchorSet anchors =
      feature_grid_anchors(cfg.anchor_cfg, size_stats({scene.gts}), scene.features.width,
                           scene.features.height);
  Rng rng(seed ^ 0xabcdef);
  return build_frozen_scene(scene.features, feat_gts, model, anchors, cfg, hp, rng);
}

}  // namespace

TEST_CASE("pooling-only chain gradient is exact to 1e-6") {
  // Regression terms with far-away targets keep smooth-L1 in its linear
  // branch, so the whole objective is linear in the model parameters.
  Rng rng(411);
  ToyModel model = ToyModel::random_init(2, 2, rng, 0.05);
  HyperParams hp;
  hp.phi_decay = 0.0;

  FrozenScene scene;
  scene.features = DenseMaps::zeros(24, 24, 2);
  for (double& v : scene.features.values) v = rng.uniform(-1, 1);
  for (int i = 0; i < 6; ++i) {
    FrozenRegTerm term;
    term.bins = assign_bins(24, 24, canonicalize(rng.uniform(6, 18), rng.uniform(6, 18),
                                                 rng.uniform(4, 8), rng.uniform(8, 14),
                                                 rng.uniform(-89.0, 90.0)));
    if (term.bins.any_empty()) continue;
    term.target.fill(-10.0);
    term.weight = rng.uniform(0.5, 2.0);
    scene.reg1.push_back(term);
  }
  REQUIRE(!scene.reg1.empty());

  // The objective is linear in the parameters here, so a wide step carries
  // no truncation error and avoids cancellation noise.
  GradCheckReport report = grad_check({scene}, model, hp, 150, 1e-3, rng);
  CHECK(report.params_checked == 150);
  CHECK(report.max_rel_error < 1e-6);
}

TEST_CASE("full-chain gradient matches finite differences to 1e-4") {
  Rng rng(413);
  ToyModel model = ToyModel::random_init(2, 2, rng, 0.05);
  DetectorConfig cfg;
  cfg.rpn_proposals = 24;
  HyperParams hp;
  hp.eta = 1.0;
  hp.n_cls = 16;

  std::vector<FrozenScene> scenes;
  scenes.push_back(frozen_from_synth(551, model, cfg, hp));
  scenes.push_back(frozen_from_synth(552, model, cfg, hp));
  bool has_terms = false;
  for (const FrozenScene& s : scenes) {
    has_terms = has_terms || !s.cls1.empty() || !s.cls2.empty();
  }
  REQUIRE(has_terms);

  GradCheckReport report = grad_check(scenes, model, hp, 120, 1e-5, rng);
  CHECK(report.params_checked == 120);
  CHECK(report.max_rel_error < 1e-4);
}

TEST_CASE("a scene without ground truth reduces to the decay gradient exactly") {
  Rng rng(417);
  ToyModel model = ToyModel::random_init(2, 2, rng, 0.1);
  HyperParams hp;

  FrozenScene scene;
  scene.features = DenseMaps::zeros(16, 16, 2);
  ModelGrads grads = ModelGrads::zeros_like(model);
  StageLosses losses = frozen_loss_and_grad(scene, model, hp.eta, grads);
  CHECK(losses.l1 == 0.0);
  CHECK(losses.l2 == 0.0);
  for (size_t i = 0; i < grads.param_count(); ++i) CHECK(grads.param(i) == 0.0);

  // Adding the decay term reproduces 2 * phi * w bit for bit.
  for (size_t i = 0; i < grads.param_count(); ++i) {
    grads.add_param(i, 2.0 * hp.phi_decay * model.param(i));
    CHECK(grads.param(i) == 2.0 * hp.phi_decay * model.param(i));
  }
}

TEST_CASE("one small sgd step decreases the frozen loss at a non-stationary point") {
  Rng rng(419);
  ToyModel model = ToyModel::random_init(2, 2, rng, 0.05);
  DetectorConfig cfg;
  cfg.rpn_proposals = 24;
  HyperParams hp;
  hp.n_cls = 16;
  hp.phi_decay = 0.0;
  hp.momentum = 0.0;

  FrozenScene scene = frozen_from_synth(701, model, cfg, hp);
  REQUIRE((!scene.cls1.empty() || !scene.cls2.empty()));

  ModelGrads grads = ModelGrads::zeros_like(model);
  StageLosses before = frozen_loss_and_grad(scene, model, hp.eta, grads);
  double gnorm = 0.0;
  for (size_t i = 0; i < grads.param_count(); ++i) gnorm += grads.param(i) * grads.param(i);
  REQUIRE(gnorm > 0.0);

  SgdState state;
  sgd_step(model, grads, state, hp, 1e-4);
  StageLosses after = frozen_loss(scene, model);
  CHECK(after.l1 + hp.eta * after.l2 < before.l1 + hp.eta * before.l2);
}

TEST_CASE("frozen_loss agrees with the standalone stage-loss functions") {
  Rng rng(421);
  ToyModel model = ToyModel::random_init(2, 2, rng, 0.05);
  DetectorConfig cfg;
  cfg.rpn_proposals = 16;
  HyperParams hp;
  hp.n_cls = 16;
  FrozenScene scene = frozen_from_synth(901, model, cfg, hp);

  const DenseMaps cls_maps = model.cls_maps(scene.features);
  const DenseMaps reg_maps = model.reg_maps(scene.features);
  auto gather = [&](const std::vector<FrozenClsTerm>& terms) {
    std::vector<ClsExample> out;
    for (const FrozenClsTerm& t : terms) {
      PooledBins bins = pool_class_bins(cls_maps, t.bins, 2);
      std::vector<double> one_hot(2, 0.0);
      one_hot[static_cast<size_t>(t.target_class)] = 1.0;
      out.push_back({softmax(vote(bins)), one_hot});
    }
    return out;
  };
  auto gather_reg = [&](const std::vector<FrozenRegTerm>& terms) {
    std::vector<RegExample> out;
    for (const FrozenRegTerm& t : terms) {
      RegExample e;
      e.active = true;
      e.pred = pool_offset_bins(reg_maps, t.bins);
      e.target = t.target;
      out.push_back(e);
    }
    return out;
  };

  StageLosses direct = frozen_loss(scene, model);
  CHECK(direct.l1 ==
        doctest::Approx(stage1_loss(gather(scene.cls1), gather_reg(scene.reg1), hp)).epsilon(1e-12));
  CHECK(direct.l2 ==
        doctest::Approx(stage2_loss(gather(scene.cls2), gather_reg(scene.reg2), hp)).epsilon(1e-12));
}
