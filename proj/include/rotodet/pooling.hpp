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
// Rotated position-sensitive pooling.
//
// An oriented RoI is divided into a 3x3 grid of bins in its derotated local
// frame. Each bin (i, j) averages one dedicated map channel over the feature
// pixels whose local coordinates fall inside the bin; channels are laid out
// position-sensitively so that bin (i, j) of class c reads channel
// 9c + 3(j-1) + (i-1) (1-based i, j). The local frame spans [0, w) x [0, h)
// (w the short side, h the long side) and is anchored at the RoI's top-left
// corner; the derotation angle follows the two-branch mapping in
// derotation_angle_deg.

#ifndef ROTODET_POOLING_HPP_
#define ROTODET_POOLING_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "rotodet/error.hpp"
#include "rotodet/geometry.hpp"

namespace rdet {

inline constexpr int kBinGrid = 3;          // k
inline constexpr int kBins = kBinGrid * kBinGrid;
inline constexpr int kOffsetDims = 8;       // regression dims per box
inline constexpr int kRegChannels = kBins * kOffsetDims;

// Channel-major map stack; within a channel values are row-major.
template <typename T>
struct MapStack {
  int width{0};
  int height{0};
  int channels{0};
  std::vector<T> values;

  static MapStack zeros(int w, int h, int c) {
    MapStack m;
    m.width = w;
    m.height = h;
    m.channels = c;
    m.values.assign(static_cast<size_t>(w) * static_cast<size_t>(h) * static_cast<size_t>(c),
                    T{0});
    return m;
  }

  size_t index(int c, int u, int v) const {
    return (static_cast<size_t>(c) * static_cast<size_t>(height) + static_cast<size_t>(v)) *
               static_cast<size_t>(width) +
           static_cast<size_t>(u);
  }
  T at(int c, int u, int v) const { return values[index(c, u, v)]; }
  T& at(int c, int u, int v) { return values[index(c, u, v)]; }
};

using ScoreMaps = MapStack<float>;   // file/interchange form (32-bit)
using DenseMaps = MapStack<double>;  // in-process form for training

// 1-based bin indices, 0-based class / regression-dim indices.
inline int cls_channel(int i, int j, int c) { return kBins * c + kBinGrid * (j - 1) + (i - 1); }
inline int reg_channel(int i, int j, int d) { return kBins * d + kBinGrid * (j - 1) + (i - 1); }

// Derotation angle for an RoI at theta_star in (-90, 90]:
//   theta_star <= 0  ->  theta_star - 90
//   theta_star  > 0  ->  90 - theta_star
double derotation_angle_deg(double theta_star);

// Local bin frame of an RoI on a feature grid: global = R(angle) * local +
// origin, with local in [0, w) x [0, h).
struct BinFrame {
  double angle_deg{0};
  double cos_t{1}, sin_t{0};
  Vec2 origin;  // top-left corner (image of local (0, 0))
  double w{0}, h{0};

  Vec2 to_global(double du, double dv) const {
    return {du * cos_t - dv * sin_t + origin.x, du * sin_t + dv * cos_t + origin.y};
  }
  Vec2 to_local(Vec2 p) const {
    const double dx = p.x - origin.x;
    const double dy = p.y - origin.y;
    return {dx * cos_t + dy * sin_t, -dx * sin_t + dy * cos_t};
  }
};

BinFrame make_bin_frame(const RotatedBox& roi);

// Pixel-to-bin assignment of an RoI over a width x height feature grid.
// Pixel centers sit at integer coordinates; pixels outside the grid are
// dropped. Throws out_of_bounds when the RoI does not overlap the grid.
struct BinAssignment {
  std::array<int, kBins> counts{};
  std::vector<std::array<int, 3>> pixels;  // (u, v, bin), bin = 3j + i (0-based)
  std::array<Vec2, kBins> bin_centers;     // global bin centers, for fallback sampling

  bool any_empty() const {
    return std::any_of(counts.begin(), counts.end(), [](int c) { return c == 0; });
  }
};

BinAssignment assign_bins(int width, int height, const RotatedBox& roi);

// Pooled 3x3 x num_classes bin values.
struct PooledBins {
  int num_classes{0};
  std::array<int, kBins> counts{};
  std::vector<double> values;  // [bin][class]

  double r(int i, int j, int c) const {  // 1-based bins
    return values[static_cast<size_t>((kBinGrid * (j - 1) + (i - 1)) * num_classes + c)];
  }
};

template <typename T>
double bilinear_sample(const MapStack<T>& maps, int channel, double u, double v) {
  u = std::clamp(u, 0.0, static_cast<double>(maps.width - 1));
  v = std::clamp(v, 0.0, static_cast<double>(maps.height - 1));
  const int u0 = std::min(static_cast<int>(u), maps.width - 2 >= 0 ? maps.width - 2 : 0);
  const int v0 = std::min(static_cast<int>(v), maps.height - 2 >= 0 ? maps.height - 2 : 0);
  const int u1 = std::min(u0 + 1, maps.width - 1);
  const int v1 = std::min(v0 + 1, maps.height - 1);
  const double fu = u - u0;
  const double fv = v - v0;
  return (1 - fu) * (1 - fv) * static_cast<double>(maps.at(channel, u0, v0)) +
         fu * (1 - fv) * static_cast<double>(maps.at(channel, u1, v0)) +
         (1 - fu) * fv * static_cast<double>(maps.at(channel, u0, v1)) +
         fu * fv * static_cast<double>(maps.at(channel, u1, v1));
}

// Mean of each bin's dedicated class channel over the bin's pixels; empty
// bins fall back to a bilinear sample at the bin center.
template <typename T>
PooledBins pool_class_bins(const MapStack<T>& maps, const BinAssignment& bins, int num_classes) {
  require(maps.channels == kBins * num_classes, Errc::invalid_argument,
          "map stack must have 9 * num_classes channels");
  PooledBins out;
  out.num_classes = num_classes;
  out.counts = bins.counts;
  out.values.assign(static_cast<size_t>(kBins) * static_cast<size_t>(num_classes), 0.0);
  for (const auto& px : bins.pixels) {
    const int bin = px[2];
    for (int c = 0; c < num_classes; ++c) {
      out.values[static_cast<size_t>(bin * num_classes + c)] +=
          static_cast<double>(maps.at(kBins * c + bin, px[0], px[1]));
    }
  }
  for (int bin = 0; bin < kBins; ++bin) {
    for (int c = 0; c < num_classes; ++c) {
      double& v = out.values[static_cast<size_t>(bin * num_classes + c)];
      if (bins.counts[static_cast<size_t>(bin)] > 0) {
        v /= bins.counts[static_cast<size_t>(bin)];
      } else {
        const Vec2 ctr = bins.bin_centers[static_cast<size_t>(bin)];
        v = bilinear_sample(maps, kBins * c + bin, ctr.x, ctr.y);
      }
    }
  }
  return out;
}

template <typename T>
PooledBins pool_class_bins(const MapStack<T>& maps, const RotatedBox& roi, int num_classes) {
  return pool_class_bins(maps, assign_bins(maps.width, maps.height, roi), num_classes);
}

// 72-channel regression pooling: position-sensitive pooling per dimension,
// then the mean over the 9 bins gives each of the 8 outputs.
template <typename T>
std::array<double, kOffsetDims> pool_offset_bins(const MapStack<T>& maps,
                                                 const BinAssignment& bins) {
  require(maps.channels == kRegChannels, Errc::invalid_argument,
          "regression stack must have 72 channels");
  std::array<std::array<double, kOffsetDims>, kBins> sums{};
  for (const auto& px : bins.pixels) {
    const int bin = px[2];
    for (int d = 0; d < kOffsetDims; ++d) {
      sums[static_cast<size_t>(bin)][static_cast<size_t>(d)] +=
          static_cast<double>(maps.at(kBins * d + bin, px[0], px[1]));
    }
  }
  std::array<double, kOffsetDims> out{};
  for (int d = 0; d < kOffsetDims; ++d) {
    double total = 0.0;
    for (int bin = 0; bin < kBins; ++bin) {
      if (bins.counts[static_cast<size_t>(bin)] > 0) {
        total += sums[static_cast<size_t>(bin)][static_cast<size_t>(d)] /
                 bins.counts[static_cast<size_t>(bin)];
      } else {
        const Vec2 ctr = bins.bin_centers[static_cast<size_t>(bin)];
        total += bilinear_sample(maps, kBins * d + bin, ctr.x, ctr.y);
      }
    }
    out[static_cast<size_t>(d)] = total / kBins;
  }
  return out;
}

template <typename T>
std::array<double, kOffsetDims> pool_offset_bins(const MapStack<T>& maps, const RotatedBox& roi) {
  return pool_offset_bins(maps, assign_bins(maps.width, maps.height, roi));
}

// Per-class sum over the 9 bins.
std::vector<double> vote(const PooledBins& bins);

// Numerically stable softmax (max subtraction).
std::vector<double> softmax(const std::vector<double>& scores);

}  // namespace rdet

#endif  // ROTODET_POOLING_HPP_
