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

#include "rotodet/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rotodet/error.hpp"

namespace rdet {

namespace {

constexpr double kPi = 3.14159265358979323846;

bool all_finite(std::initializer_list<double> vals) {
  for (double v : vals) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

Vec2 rotate(Vec2 v, double cos_t, double sin_t) {
  return {v.x * cos_t - v.y * sin_t, v.x * sin_t + v.y * cos_t};
}

}  // namespace

double deg2rad(double deg) { return deg * (kPi / 180.0); }
double rad2deg(double rad) { return rad * (180.0 / kPi); }

double wrap_angle_deg(double deg) {
  double a = std::fmod(deg, 180.0);
  if (a <= -90.0) {
    a += 180.0;
  } else if (a > 90.0) {
    a -= 180.0;
  }
  return a;
}

RotatedBox canonicalize(double cx, double cy, double w, double h, double theta_deg) {
  require(all_finite({cx, cy, w, h, theta_deg}), Errc::invalid_argument,
          "box fields must be finite");
  require(w > 0.0 && h > 0.0, Errc::invalid_argument, "box sides must be positive");
  if (w > h) {
    std::swap(w, h);
    theta_deg += 90.0;
  }
  return RotatedBox{cx, cy, w, h, wrap_angle_deg(theta_deg)};
}

RotatedBox canonicalize(const RotatedBox& box) {
  return canonicalize(box.cx, box.cy, box.w, box.h, box.theta_deg);
}

QuadBox to_quad(const RotatedBox& box) {
  const double t = deg2rad(box.theta_deg);
  const double c = std::cos(t);
  const double s = std::sin(t);
  // Derotated offsets sorted by (y, x); x spans the lengthwise side.
  const double hw = 0.5 * box.w;
  const double hh = 0.5 * box.h;
  const Vec2 local[4] = {{-hh, -hw}, {hh, -hw}, {-hh, hw}, {hh, hw}};
  QuadBox q;
  for (int i = 0; i < 4; ++i) {
    Vec2 p = rotate(local[i], c, s);
    q.xs[static_cast<size_t>(i)] = box.cx + p.x;
    q.ys[static_cast<size_t>(i)] = box.cy + p.y;
  }
  return q;
}

RotatedBox from_quad(const QuadBox& quad) {
  constexpr double kTol = 1e-6;
  Vec2 center{0, 0};
  for (int i = 0; i < 4; ++i) {
    Vec2 v = quad.vertex(i);
    require(all_finite({v.x, v.y}), Errc::invalid_argument, "quad vertices must be finite");
    center = center + 0.25 * v;
  }

  // Boundary order around the centroid.
  std::array<int, 4> order{0, 1, 2, 3};
  std::array<double, 4> ang{};
  for (int i = 0; i < 4; ++i) {
    Vec2 d = quad.vertex(i) - center;
    ang[static_cast<size_t>(i)] = std::atan2(d.y, d.x);
  }
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return ang[static_cast<size_t>(a)] < ang[static_cast<size_t>(b)]; });

  const Vec2 p0 = quad.vertex(order[0]);
  const Vec2 p1 = quad.vertex(order[1]);
  const Vec2 p2 = quad.vertex(order[2]);

  const Vec2 e0 = p1 - p0;
  const Vec2 e1 = p2 - p1;
  const double len0 = std::hypot(e0.x, e0.y);
  const double len1 = std::hypot(e1.x, e1.y);
  require(len0 > kTol && len1 > kTol, Errc::geometry, "degenerate quad");

  double theta;
  if (std::abs(len0 - len1) <= kTol) {
    // Square: pick the axis whose angle falls in (0, 90].
    double a0 = wrap_angle_deg(rad2deg(std::atan2(e0.y, e0.x)));
    double a1 = wrap_angle_deg(rad2deg(std::atan2(e1.y, e1.x)));
    theta = (a0 > 0.0 && a0 <= 90.0) ? a0 : a1;
  } else {
    const Vec2 lengthwise = (len0 >= len1) ? e0 : e1;
    theta = wrap_angle_deg(rad2deg(std::atan2(lengthwise.y, lengthwise.x)));
  }

  RotatedBox box = canonicalize(center.x, center.y, std::min(len0, len1), std::max(len0, len1),
                                theta);

  // Reject inputs that are not rectangles: every input vertex must coincide
  // with a corner of the reconstructed box.
  QuadBox rebuilt = to_quad(box);
  for (int i = 0; i < 4; ++i) {
    Vec2 v = quad.vertex(i);
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < 4; ++j) {
      Vec2 r = rebuilt.vertex(j);
      best = std::min(best, std::hypot(v.x - r.x, v.y - r.y));
    }
    require(best <= kTol, Errc::geometry, "vertices do not form a rectangle");
  }
  return box;
}

std::vector<Vec2> convex_hull(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end(), [](Vec2 a, Vec2 b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](Vec2 a, Vec2 b) { return a.x == b.x && a.y == b.y; }),
            pts.end());
  const size_t n = pts.size();
  if (n < 3) return pts;

  std::vector<Vec2> hull(2 * n);
  size_t k = 0;
  for (size_t i = 0; i < n; ++i) {  // lower
    while (k >= 2 && cross(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0) --k;
    hull[k++] = pts[i];
  }
  for (size_t i = n - 1, lower = k + 1; i-- > 0;) {  // upper
    while (k >= lower && cross(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

RotatedBox min_area_rect(const std::vector<Vec2>& points) {
  require(points.size() >= 3, Errc::geometry, "min_area_rect needs at least 3 points");
  for (const Vec2& p : points) {
    require(all_finite({p.x, p.y}), Errc::invalid_argument, "points must be finite");
  }
  std::vector<Vec2> hull = convex_hull(points);
  require(hull.size() >= 3, Errc::geometry, "points are collinear or coincident");

  double best_area = std::numeric_limits<double>::infinity();
  double best_smin = 0, best_smax = 0, best_tmin = 0, best_tmax = 0;
  Vec2 best_origin{}, best_dir{};
  const size_t n = hull.size();
  for (size_t i = 0; i < n; ++i) {
    Vec2 a = hull[i];
    Vec2 e = hull[(i + 1) % n] - a;
    double len = std::hypot(e.x, e.y);
    if (len <= 0.0) continue;
    Vec2 dir{e.x / len, e.y / len};
    Vec2 nrm{-dir.y, dir.x};
    double smin = 0, smax = 0, tmin = 0, tmax = 0;
    for (const Vec2& p : hull) {
      Vec2 d = p - a;
      double sp = dot(d, dir);
      double tp = dot(d, nrm);
      smin = std::min(smin, sp);
      smax = std::max(smax, sp);
      tmin = std::min(tmin, tp);
      tmax = std::max(tmax, tp);
    }
    double area = (smax - smin) * (tmax - tmin);
    if (area < best_area) {
      best_area = area;
      best_origin = a;
      best_dir = dir;
      best_smin = smin;
      best_smax = smax;
      best_tmin = tmin;
      best_tmax = tmax;
    }
  }

  const double side_s = best_smax - best_smin;
  const double side_t = best_tmax - best_tmin;
  require(side_s > 1e-12 && side_t > 1e-12, Errc::geometry, "points are collinear or coincident");
  Vec2 nrm{-best_dir.y, best_dir.x};
  Vec2 center = best_origin + (0.5 * (best_smin + best_smax)) * best_dir +
                (0.5 * (best_tmin + best_tmax)) * nrm;
  double theta = rad2deg(std::atan2(best_dir.y, best_dir.x));
  // side_s lies along `theta`, so it plays the h role in the raw tuple.
  return canonicalize(center.x, center.y, side_t, side_s, theta);
}

AxisBox aabb(const RotatedBox& box) {
  QuadBox q = to_quad(box);
  AxisBox r{q.xs[0], q.ys[0], q.xs[0], q.ys[0]};
  for (int i = 1; i < 4; ++i) {
    r.xmin = std::min(r.xmin, q.xs[static_cast<size_t>(i)]);
    r.xmax = std::max(r.xmax, q.xs[static_cast<size_t>(i)]);
    r.ymin = std::min(r.ymin, q.ys[static_cast<size_t>(i)]);
    r.ymax = std::max(r.ymax, q.ys[static_cast<size_t>(i)]);
  }
  return r;
}

double iou_axis(const AxisBox& a, const AxisBox& b) {
  const double iw = std::min(a.xmax, b.xmax) - std::max(a.xmin, b.xmin);
  const double ih = std::min(a.ymax, b.ymax) - std::max(a.ymin, b.ymin);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

double iou_axis(const RotatedBox& a, const RotatedBox& b) { return iou_axis(aabb(a), aabb(b)); }

double polygon_area(const std::vector<Vec2>& poly) {
  const size_t n = poly.size();
  if (n < 3) return 0.0;
  double acc = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const Vec2& p = poly[i];
    const Vec2& q = poly[(i + 1) % n];
    acc += cross(p, q);
  }
  return 0.5 * std::abs(acc);
}

namespace {

// Sutherland-Hodgman clip of a convex subject by one half-plane. Points with
// signed distance >= -eps count as inside, so a polygon clipped by its own
// edges passes through unchanged.
std::vector<Vec2> clip_half_plane(const std::vector<Vec2>& subject, Vec2 edge_pt, Vec2 unit_nrm) {
  constexpr double kEps = 1e-9;
  std::vector<Vec2> out;
  const size_t n = subject.size();
  out.reserve(n + 1);
  for (size_t i = 0; i < n; ++i) {
    const Vec2& cur = subject[i];
    const Vec2& nxt = subject[(i + 1) % n];
    const double dc = dot(cur - edge_pt, unit_nrm);
    const double dn = dot(nxt - edge_pt, unit_nrm);
    const bool cur_in = dc >= -kEps;
    const bool nxt_in = dn >= -kEps;
    if (cur_in) out.push_back(cur);
    if (cur_in != nxt_in) {
      const double t = dc / (dc - dn);
      out.push_back(cur + t * (nxt - cur));
    }
  }
  return out;
}

std::vector<Vec2> quad_to_ccw_polygon(const QuadBox& q) {
  // to_quad's collated order is not a boundary order; sort around centroid.
  Vec2 c{0, 0};
  for (int i = 0; i < 4; ++i) c = c + 0.25 * q.vertex(i);
  std::vector<Vec2> poly{q.vertex(0), q.vertex(1), q.vertex(2), q.vertex(3)};
  std::sort(poly.begin(), poly.end(), [&](Vec2 a, Vec2 b) {
    return std::atan2(a.y - c.y, a.x - c.x) < std::atan2(b.y - c.y, b.x - c.x);
  });
  return poly;
}

}  // namespace

double convex_intersection_area(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
  std::vector<Vec2> poly = a;
  const size_t n = b.size();
  for (size_t i = 0; i < n && poly.size() >= 3; ++i) {
    const Vec2 p = b[i];
    const Vec2 q = b[(i + 1) % n];
    Vec2 e = q - p;
    const double len = std::hypot(e.x, e.y);
    if (len <= 0.0) continue;
    // Inward normal for a CCW polygon (y-down handedness does not matter as
    // long as orientation is consistent).
    Vec2 nrm{-e.y / len, e.x / len};
    poly = clip_half_plane(poly, p, nrm);
  }
  return poly.size() >= 3 ? polygon_area(poly) : 0.0;
}

double iou_rotated(const RotatedBox& a, const RotatedBox& b) {
  std::vector<Vec2> pa = quad_to_ccw_polygon(to_quad(a));
  std::vector<Vec2> pb = quad_to_ccw_polygon(to_quad(b));
  if (polygon_area(pa) <= 0.0 || polygon_area(pb) <= 0.0) return 0.0;
  // Ensure CCW orientation for the clipper.
  double sa = 0.0;
  for (size_t i = 0; i < pb.size(); ++i) sa += cross(pb[i], pb[(i + 1) % pb.size()]);
  if (sa < 0.0) std::reverse(pb.begin(), pb.end());
  const double inter = convex_intersection_area(pa, pb);
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

std::vector<int> nms_rotated(const std::vector<ScoredBox>& dets, double iou_threshold) {
  for (const ScoredBox& d : dets) {
    require(std::isfinite(d.score), Errc::invalid_argument, "scores must be finite");
  }
  std::vector<int> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return dets[static_cast<size_t>(a)].score > dets[static_cast<size_t>(b)].score;
  });
  std::vector<int> keep;
  for (int idx : order) {
    bool suppressed = false;
    for (int k : keep) {
      if (iou_rotated(dets[static_cast<size_t>(idx)].box, dets[static_cast<size_t>(k)].box) >=
          iou_threshold) {
        suppressed = true;
        break;
      }
    }
    if (!suppressed) keep.push_back(idx);
  }
  return keep;
}

bool point_in_box(Vec2 p, const RotatedBox& box) {
  const double t = deg2rad(box.theta_deg);
  const Vec2 u{std::cos(t), std::sin(t)};
  const Vec2 v{-u.y, u.x};
  const Vec2 d = p - box.center();
  return std::abs(dot(d, u)) <= 0.5 * box.h && std::abs(dot(d, v)) <= 0.5 * box.w;
}

}  // namespace rdet
