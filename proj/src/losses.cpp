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

#include "rotodet/losses.hpp"

#include <cmath>

#include "rotodet/error.hpp"

namespace rdet {

namespace {
constexpr double kProbClamp = 1e-12;
}

double cross_entropy(const std::vector<double>& p, const std::vector<double>& p_hat) {
  require(p.size() == p_hat.size() && !p.empty(), Errc::invalid_argument,
          "probability vectors must have matching non-zero size");
  double total = 0.0;
  for (double v : p) {
    require(std::isfinite(v) && v >= 0.0, Errc::invalid_argument,
            "probabilities must be finite and non-negative");
    total += v;
  }
  require(std::abs(total - 1.0) <= 1e-6, Errc::invalid_argument,
          "probabilities must sum to 1 within 1e-6");
  double loss = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    if (p_hat[i] != 0.0) loss -= p_hat[i] * std::log(std::max(p[i], kProbClamp));
  }
  return loss;
}

double smooth_l1(double x) { return std::abs(x) < 1.0 ? 0.5 * x * x : std::abs(x) - 0.5; }

double smooth_l1_grad(double x) { return std::abs(x) < 1.0 ? x : (x > 0.0 ? 1.0 : -1.0); }

double offsets_loss(const std::array<double, 8>& pred, const std::array<double, 8>& target) {
  double loss = 0.0;
  for (size_t d = 0; d < 8; ++d) loss += smooth_l1(pred[d] - target[d]);
  return loss;
}

double stage1_loss(const std::vector<ClsExample>& cls, const std::vector<RegExample>& reg,
                   const HyperParams& hp) {
  double cls_sum = 0.0;
  for (const ClsExample& e : cls) cls_sum += cross_entropy(e.probs, e.one_hot);
  double reg_sum = 0.0;
  for (const RegExample& e : reg) {
    if (e.active) reg_sum += offsets_loss(e.pred, e.target);
  }
  return cls_sum / hp.n_cls + hp.lambda1 * reg_sum / hp.n_reg;
}

double stage2_loss(const std::vector<ClsExample>& cls, const std::vector<RegExample>& reg,
                   const HyperParams& hp) {
  double cls_sum = 0.0;
  for (const ClsExample& e : cls) cls_sum += cross_entropy(e.probs, e.one_hot);
  double reg_sum = 0.0;
  for (const RegExample& e : reg) {
    if (e.active) reg_sum += offsets_loss(e.pred, e.target);
  }
  return cls_sum + hp.lambda2 * reg_sum;
}

ToyModel ToyModel::random_init(int in_channels, int num_classes, Rng& rng, double stddev) {
  require(in_channels >= 1 && num_classes >= 2, Errc::invalid_argument,
          "model needs >= 1 input channel and >= 2 classes");
  ToyModel m;
  m.in_channels = in_channels;
  m.num_classes = num_classes;
  m.w_cls.resize(static_cast<size_t>(m.cls_channels()) * static_cast<size_t>(in_channels));
  m.b_cls.assign(static_cast<size_t>(m.cls_channels()), 0.0);
  m.w_reg.resize(static_cast<size_t>(kRegChannels) * static_cast<size_t>(in_channels));
  m.b_reg.assign(kRegChannels, 0.0);
  for (double& w : m.w_cls) w = rng.normal(0.0, stddev);
  for (double& w : m.w_reg) w = rng.normal(0.0, stddev);
  return m;
}

namespace {

DenseMaps linear_forward(const DenseMaps& features, const std::vector<double>& weights,
                         const std::vector<double>& biases, int out_channels, int in_channels) {
  require(features.channels == in_channels, Errc::invalid_argument,
          "feature channel count does not match the model");
  DenseMaps out = DenseMaps::zeros(features.width, features.height, out_channels);
  const size_t plane = static_cast<size_t>(features.width) * static_cast<size_t>(features.height);
  for (int ch = 0; ch < out_channels; ++ch) {
    double* dst = out.values.data() + static_cast<size_t>(ch) * plane;
    for (size_t i = 0; i < plane; ++i) dst[i] = biases[static_cast<size_t>(ch)];
    for (int f = 0; f < in_channels; ++f) {
      const double w = weights[static_cast<size_t>(ch) * static_cast<size_t>(in_channels) +
                               static_cast<size_t>(f)];
      const double* src = features.values.data() + static_cast<size_t>(f) * plane;
      for (size_t i = 0; i < plane; ++i) dst[i] += w * src[i];
    }
  }
  return out;
}

}  // namespace

DenseMaps ToyModel::cls_maps(const DenseMaps& features) const {
  return linear_forward(features, w_cls, b_cls, cls_channels(), in_channels);
}

DenseMaps ToyModel::reg_maps(const DenseMaps& features) const {
  return linear_forward(features, w_reg, b_reg, kRegChannels, in_channels);
}

size_t ToyModel::param_count() const {
  return w_cls.size() + b_cls.size() + w_reg.size() + b_reg.size();
}

double ToyModel::param(size_t i) const {
  if (i < w_cls.size()) return w_cls[i];
  i -= w_cls.size();
  if (i < b_cls.size()) return b_cls[i];
  i -= b_cls.size();
  if (i < w_reg.size()) return w_reg[i];
  i -= w_reg.size();
  return b_reg[i];
}

void ToyModel::set_param(size_t i, double v) {
  if (i < w_cls.size()) {
    w_cls[i] = v;
    return;
  }
  i -= w_cls.size();
  if (i < b_cls.size()) {
    b_cls[i] = v;
    return;
  }
  i -= b_cls.size();
  if (i < w_reg.size()) {
    w_reg[i] = v;
    return;
  }
  i -= w_reg.size();
  b_reg[i] = v;
}

double ToyModel::squared_norm() const {
  double acc = 0.0;
  for (size_t i = 0; i < param_count(); ++i) {
    const double v = param(i);
    acc += v * v;
  }
  return acc;
}

ModelGrads ModelGrads::zeros_like(const ToyModel& m) {
  ModelGrads g;
  g.w_cls.assign(m.w_cls.size(), 0.0);
  g.b_cls.assign(m.b_cls.size(), 0.0);
  g.w_reg.assign(m.w_reg.size(), 0.0);
  g.b_reg.assign(m.b_reg.size(), 0.0);
  return g;
}

void ModelGrads::zero() {
  std::fill(w_cls.begin(), w_cls.end(), 0.0);
  std::fill(b_cls.begin(), b_cls.end(), 0.0);
  std::fill(w_reg.begin(), w_reg.end(), 0.0);
  std::fill(b_reg.begin(), b_reg.end(), 0.0);
}

size_t ModelGrads::param_count() const {
  return w_cls.size() + b_cls.size() + w_reg.size() + b_reg.size();
}

double ModelGrads::param(size_t i) const {
  if (i < w_cls.size()) return w_cls[i];
  i -= w_cls.size();
  if (i < b_cls.size()) return b_cls[i];
  i -= b_cls.size();
  if (i < w_reg.size()) return w_reg[i];
  i -= w_reg.size();
  return b_reg[i];
}

void ModelGrads::add_param(size_t i, double v) {
  if (i < w_cls.size()) {
    w_cls[i] += v;
    return;
  }
  i -= w_cls.size();
  if (i < b_cls.size()) {
    b_cls[i] += v;
    return;
  }
  i -= b_cls.size();
  if (i < w_reg.size()) {
    w_reg[i] += v;
    return;
  }
  i -= w_reg.size();
  b_reg[i] += v;
}

double joint_loss(const std::vector<double>& l1_terms, const std::vector<double>& l2_terms,
                  const ToyModel& model, const HyperParams& hp) {
  double l1 = 0.0, l2 = 0.0;
  for (double v : l1_terms) l1 += v;
  for (double v : l2_terms) l2 += v;
  return l1 + hp.eta * l2 + hp.phi_decay * model.squared_norm();
}

void sgd_step(ToyModel& model, const ModelGrads& grads, SgdState& state, const HyperParams& hp,
              double lr) {
  const size_t n = model.param_count();
  require(grads.param_count() == n, Errc::invalid_argument, "gradient shape mismatch");
  if (state.velocity.size() != n) state.velocity.assign(n, 0.0);
  for (size_t i = 0; i < n; ++i) {
    const double w = model.param(i);
    const double g = grads.param(i) + 2.0 * hp.phi_decay * w;
    state.velocity[i] = hp.momentum * state.velocity[i] + g;
    model.set_param(i, w - lr * state.velocity[i]);
  }
}

}  // namespace rdet
