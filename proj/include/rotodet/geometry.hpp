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

#ifndef ROTODET_GEOMETRY_HPP_
#define ROTODET_GEOMETRY_HPP_

#include <array>
#include <cstddef>
#include <vector>

namespace rdet {

struct Vec2 {
  double x{0}, y{0};
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }

double deg2rad(double deg);
double rad2deg(double rad);

// Wraps an angle into (-90, 90] modulo 180.
double wrap_angle_deg(double deg);

// Oriented rectangle in pixel coordinates (x right, y down).
//
// Canonical form: w <= h, theta_deg in (-90, 90]. theta_deg is the angle of
// the lengthwise (h) axis measured from the +x axis; the axis direction is
// (cos theta, sin theta).
struct RotatedBox {
  double cx{0}, cy{0};
  double w{0}, h{0};
  double theta_deg{0};

  double area() const { return w * h; }
  Vec2 center() const { return {cx, cy}; }
};

// Four vertices of a (possibly non-rectangular) quadrilateral. For rectangles
// produced by to_quad the vertices follow the collation rule: derotate by the
// lengthwise angle, then order lexicographically by (y, then x).
struct QuadBox {
  std::array<double, 4> xs{};
  std::array<double, 4> ys{};

  Vec2 vertex(int i) const { return {xs[static_cast<size_t>(i)], ys[static_cast<size_t>(i)]}; }
};

struct AxisBox {
  double xmin{0}, ymin{0}, xmax{0}, ymax{0};

  double area() const { return (xmax - xmin) * (ymax - ymin); }
};

// Normalizes a raw (cx, cy, w, h, theta) tuple: swaps sides so that w <= h
// (adding 90 degrees to theta when it does) and wraps theta into (-90, 90].
// theta in the raw tuple is read as the angle of the h-axis. Throws on
// non-positive sides or non-finite fields.
RotatedBox canonicalize(double cx, double cy, double w, double h, double theta_deg);
RotatedBox canonicalize(const RotatedBox& box);

// Corner vertices of a canonical box in collated order.
QuadBox to_quad(const RotatedBox& box);

// Inverse of to_quad. Accepts the four vertices in any order; they must form
// a rectangle to within 1e-6 px (use min_area_rect otherwise). Square inputs
// take the axis whose angle lies in (0, 90].
RotatedBox from_quad(const QuadBox& quad);

// Minimum-area enclosing rotated rectangle of >= 3 points (convex hull +
// rotating calipers; one side of the result is flush with a hull edge).
// Throws when all points are collinear or coincident.
RotatedBox min_area_rect(const std::vector<Vec2>& points);

// Tightest axis-aligned box containing the four corners.
AxisBox aabb(const RotatedBox& box);

// IoU of the axis-aligned conversions of the two boxes.
double iou_axis(const RotatedBox& a, const RotatedBox& b);
double iou_axis(const AxisBox& a, const AxisBox& b);

// Exact IoU via convex polygon clipping + shoelace area.
double iou_rotated(const RotatedBox& a, const RotatedBox& b);

// Area of intersection of two convex polygons (vertices in boundary order).
double convex_intersection_area(const std::vector<Vec2>& a, const std::vector<Vec2>& b);

double polygon_area(const std::vector<Vec2>& poly);

// Monotone-chain convex hull in counter-clockwise order (collinear points
// dropped). Returns fewer than 3 points for degenerate input.
std::vector<Vec2> convex_hull(std::vector<Vec2> points);

struct ScoredBox {
  RotatedBox box;
  double score{0};
};

// Greedy NMS: boxes sorted by descending score (ties keep input order); a box
// is suppressed when its rotated IoU with any kept box reaches iou_threshold.
// Returns indices into `dets` in descending-score order.
std::vector<int> nms_rotated(const std::vector<ScoredBox>& dets, double iou_threshold);

bool point_in_box(Vec2 p, const RotatedBox& box);

}  // namespace rdet

#endif  // ROTODET_GEOMETRY_HPP_
