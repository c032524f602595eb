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

#ifndef ROTODET_LOSSES_HPP_
#define ROTODET_LOSSES_HPP_

#include <array>
#include <cstddef>
#include <vector>

#include "rotodet/pooling.hpp"
#include "rotodet/random.hpp"

namespace rdet {

struct HyperParams {
  double lambda1{10.0};  // stage-1 regression weight
  double lambda2{1.0};   // stage-2 regression weight
  double eta{1.0};       // stage-2 weight in the joint loss
  int n_cls{64};         // stage-1 classification normalizer and sample cap
  int n_reg{1000};       // stage-1 regression normalizer
  double phi_decay{0.0005};
  double lr{0.001};
  double lr_after_drop{0.0001};
  long long lr_drop_iter{10000};
  double momentum{0.9};
  int batch_size{32};

  double effective_lr(long long iteration) const {
    return iteration < lr_drop_iter ? lr : lr_after_drop;
  }
};

// Cross-entropy -sum(p_hat * log p) with probabilities clamped at 1e-12.
// p must sum to 1 within 1e-6.
double cross_entropy(const std::vector<double>& p, const std::vector<double>& p_hat);

double smooth_l1(double x);
double smooth_l1_grad(double x);

// Sum of smooth-L1 over the 8 offset dimensions of (pred - target).
double offsets_loss(const std::array<double, 8>& pred, const std::array<double, 8>& target);

// One classification example: predicted class probabilities and the one-hot
// label. One regression example: predicted vs. target offsets plus the
// active flag (the label-side regression mask).
struct ClsExample {
  std::vector<double> probs;
  std::vector<double> one_hot;
};
struct RegExample {
  std::array<double, 8> pred{};
  std::array<double, 8> target{};
  bool active{false};
};

// Stage-1 multi-task loss: (1/n_cls) * sum CE + lambda1 * (1/n_reg) * sum
// of masked regression losses.
double stage1_loss(const std::vector<ClsExample>& cls, const std::vector<RegExample>& reg,
                   const HyperParams& hp);

// Stage-2 multi-task loss: unnormalized sums, regression weighted by lambda2.
double stage2_loss(const std::vector<ClsExample>& cls, const std::vector<RegExample>& reg,
                   const HyperParams& hp);

// A 1x1 linear map from the input feature grid to the 9*num_classes-channel
// classification stack and the 72-channel regression stack.
struct ToyModel {
  int in_channels{2};
  int num_classes{2};
  std::vector<double> w_cls;  // [cls_channels][in_channels]
  std::vector<double> b_cls;  // [cls_channels]
  std::vector<double> w_reg;  // [72][in_channels]
  std::vector<double> b_reg;  // [72]

  int cls_channels() const { return kBins * num_classes; }

  static ToyModel random_init(int in_channels, int num_classes, Rng& rng, double stddev = 0.01);

  DenseMaps cls_maps(const DenseMaps& features) const;
  DenseMaps reg_maps(const DenseMaps& features) const;

  // Flat parameter view in w_cls, b_cls, w_reg, b_reg order.
  size_t param_count() const;
  double param(size_t i) const;
  void set_param(size_t i, double v);
  double squared_norm() const;
};

struct ModelGrads {
  std::vector<double> w_cls, b_cls, w_reg, b_reg;

  static ModelGrads zeros_like(const ToyModel& m);
  void zero();
  size_t param_count() const;
  double param(size_t i) const;
  void add_param(size_t i, double v);
};

// Joint loss over a mini-batch: sum of stage-1 losses + eta * sum of stage-2
// losses + phi * ||w||^2.
double joint_loss(const std::vector<double>& l1_terms, const std::vector<double>& l2_terms,
                  const ToyModel& model, const HyperParams& hp);

// Momentum SGD over the joint objective. `grads` carries the data term only;
// the decay term's gradient (2 * phi * w) is added here:
//   velocity = momentum * velocity + grads + 2 * phi * w
//   w       -= lr * velocity
struct SgdState {
  std::vector<double> velocity;
};

void sgd_step(ToyModel& model, const ModelGrads& grads, SgdState& state, const HyperParams& hp,
              double lr);

}  // namespace rdet

#endif  // ROTODET_LOSSES_HPP_
