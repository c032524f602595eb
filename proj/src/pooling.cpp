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

#include "rotodet/pooling.hpp"

#include <cmath>

namespace rdet {

double derotation_angle_deg(double theta_star) {
  require(theta_star > -90.0 && theta_star <= 90.0, Errc::invalid_argument,
          "theta_star must lie in (-90, 90]");
  return theta_star <= 0.0 ? theta_star - 90.0 : 90.0 - theta_star;
}

BinFrame make_bin_frame(const RotatedBox& roi) {
  BinFrame f;
  f.angle_deg = derotation_angle_deg(roi.theta_deg);
  const double t = deg2rad(f.angle_deg);
  f.cos_t = std::cos(t);
  f.sin_t = std::sin(t);
  f.w = roi.w;
  f.h = roi.h;
  // Top-left corner: the image of local (0, 0), placed so the RoI center maps
  // to local (w/2, h/2).
  const double hx = 0.5 * roi.w;
  const double hy = 0.5 * roi.h;
  f.origin = {roi.cx - (hx * f.cos_t - hy * f.sin_t), roi.cy - (hx * f.sin_t + hy * f.cos_t)};
  return f;
}

BinAssignment assign_bins(int width, int height, const RotatedBox& roi) {
  require(width >= 1 && height >= 1, Errc::invalid_argument, "empty map");
  const BinFrame f = make_bin_frame(roi);

  // Scan window: axis-aligned bounds of the pooled rectangle.
  double xmin = f.origin.x, xmax = f.origin.x, ymin = f.origin.y, ymax = f.origin.y;
  const double corners[3][2] = {{f.w, 0.0}, {0.0, f.h}, {f.w, f.h}};
  for (const auto& c : corners) {
    const Vec2 p = f.to_global(c[0], c[1]);
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  require(xmax >= 0.0 && xmin <= width - 1.0 && ymax >= 0.0 && ymin <= height - 1.0,
          Errc::out_of_bounds, "RoI lies entirely outside the map");

  BinAssignment out;
  for (int j = 0; j < kBinGrid; ++j) {
    for (int i = 0; i < kBinGrid; ++i) {
      out.bin_centers[static_cast<size_t>(kBinGrid * j + i)] =
          f.to_global((i + 0.5) * f.w / kBinGrid, (j + 0.5) * f.h / kBinGrid);
    }
  }

  const int u_lo = std::max(0, static_cast<int>(std::floor(xmin)));
  const int u_hi = std::min(width - 1, static_cast<int>(std::ceil(xmax)));
  const int v_lo = std::max(0, static_cast<int>(std::floor(ymin)));
  const int v_hi = std::min(height - 1, static_cast<int>(std::ceil(ymax)));
  for (int v = v_lo; v <= v_hi; ++v) {
    for (int u = u_lo; u <= u_hi; ++u) {
      const Vec2 local = f.to_local({static_cast<double>(u), static_cast<double>(v)});
      if (local.x < 0.0 || local.x >= f.w || local.y < 0.0 || local.y >= f.h) continue;
      // Half-open thirds partition each in-range pixel into exactly one bin.
      const int i = std::min(kBinGrid - 1, static_cast<int>(local.x * kBinGrid / f.w));
      const int j = std::min(kBinGrid - 1, static_cast<int>(local.y * kBinGrid / f.h));
      const int bin = kBinGrid * j + i;
      out.pixels.push_back({u, v, bin});
      ++out.counts[static_cast<size_t>(bin)];
    }
  }
  return out;
}

std::vector<double> vote(const PooledBins& bins) {
  std::vector<double> scores(static_cast<size_t>(bins.num_classes), 0.0);
  for (int bin = 0; bin < kBins; ++bin) {
    for (int c = 0; c < bins.num_classes; ++c) {
      scores[static_cast<size_t>(c)] += bins.values[static_cast<size_t>(bin * bins.num_classes + c)];
    }
  }
  return scores;
}

std::vector<double> softmax(const std::vector<double>& scores) {
  require(!scores.empty(), Errc::invalid_argument, "softmax of empty vector");
  double peak = scores[0];
  for (double s : scores) {
    require(std::isfinite(s), Errc::invalid_argument, "scores must be finite");
    peak = std::max(peak, s);
  }
  std::vector<double> out(scores.size());
  double total = 0.0;
  for (size_t i = 0; i < scores.size(); ++i) {
    out[i] = std::exp(scores[i] - peak);
    total += out[i];
  }
  for (double& v : out) v /= total;
  return out;
}

}  // namespace rdet
