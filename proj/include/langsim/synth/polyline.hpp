// Copyright 2026 The LangSim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "langsim/core/error.hpp"
#include "langsim/core/types.hpp"

namespace langsim {

using Polyline = std::vector<Vec2>;

inline double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

/// Left normal of a direction.
inline Vec2 left_of(const Vec2& d) { return {-d.y(), d.x()}; }

inline double polyline_length(const Polyline& pl) {
  double len = 0.0;
  for (size_t i = 1; i < pl.size(); ++i) len += (pl[i] - pl[i - 1]).norm();
  return len;
}

/// Closest point on segment [a, b]; returns parameter in [0, 1].
inline double project_on_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double l2 = ab.squaredNorm();
  if (l2 <= 0.0) return 0.0;
  return std::clamp((p - a).dot(ab) / l2, 0.0, 1.0);
}

struct PolylineProjection {
  double s = 0.0;        // arc length of the foot point
  double lateral = 0.0;  // signed offset, positive to the left of travel
  double distance = std::numeric_limits<double>::infinity();
  size_t segment = 0;
};

/// Projects `p` onto the polyline, optionally restricting to arc lengths in [s_lo, s_hi].
inline PolylineProjection project(const Polyline& pl, const Vec2& p,
                                  double s_lo = -std::numeric_limits<double>::infinity(),
                                  double s_hi = std::numeric_limits<double>::infinity()) {
  PolylineProjection best;
  double acc = 0.0;
  for (size_t i = 0; i + 1 < pl.size(); ++i) {
    const Vec2& a = pl[i];
    const Vec2& b = pl[i + 1];
    const double seg_len = (b - a).norm();
    if (acc + seg_len >= s_lo && acc <= s_hi) {
      const double u = project_on_segment(p, a, b);
      const Vec2 foot = a + u * (b - a);
      const double d = (p - foot).norm();
      if (d < best.distance) {
        best.distance = d;
        best.s = acc + u * seg_len;
        best.segment = i;
        const Vec2 dir = seg_len > 0.0 ? Vec2((b - a) / seg_len) : Vec2(1.0, 0.0);
        best.lateral = cross2(dir, p - foot) >= 0.0 ? d : -d;
      }
    }
    acc += seg_len;
  }
  return best;
}

/// Point and unit tangent at arc length s (clamped; extrapolates linearly past the end).
inline std::pair<Vec2, Vec2> point_at(const Polyline& pl, double s) {
  require(pl.size() >= 2, "point_at: polyline needs >= 2 points");
  double acc = 0.0;
  if (s <= 0.0) {
    const Vec2 d = (pl[1] - pl[0]).normalized();
    return {pl[0] + s * d, d};
  }
  for (size_t i = 0; i + 1 < pl.size(); ++i) {
    const double seg_len = (pl[i + 1] - pl[i]).norm();
    if (s <= acc + seg_len || i + 2 == pl.size()) {
      const Vec2 d = (pl[i + 1] - pl[i]) / seg_len;
      return {pl[i] + (s - acc) * d, d};
    }
    acc += seg_len;
  }
  return {pl.back(), (pl.back() - pl[pl.size() - 2]).normalized()};
}

/// Resamples at (approximately) uniform spacing, keeping both endpoints.
inline Polyline resample(const Polyline& pl, double spacing) {
  const double len = polyline_length(pl);
  const int n = std::max(1, static_cast<int>(std::ceil(len / spacing)));
  Polyline out;
  out.reserve(n + 1);
  for (int i = 0; i <= n; ++i) out.push_back(point_at(pl, len * i / n).first);
  return out;
}

/// Appends `tail` to `head`, skipping a duplicated joint point.
inline void append_polyline(Polyline& head, const Polyline& tail) {
  for (const Vec2& p : tail) {
    if (!head.empty() && (head.back() - p).norm() < 1e-9) continue;
    head.push_back(p);
  }
}

/// Heading change per metre around arc length s, averaged over a window.
inline double curvature_at(const Polyline& pl, double s, double window = 4.0) {
  const auto [p0, d0] = point_at(pl, s - window * 0.5);
  const auto [p1, d1] = point_at(pl, s + window * 0.5);
  (void)p0;
  (void)p1;
  return std::abs(wrap_angle(std::atan2(d1.y(), d1.x()) - std::atan2(d0.y(), d0.x()))) / window;
}

/// Cubic Bezier sampled with `n` segments.
inline Polyline bezier(const Vec2& p0, const Vec2& c0, const Vec2& c1, const Vec2& p1, int n) {
  Polyline out;
  out.reserve(n + 1);
  for (int i = 0; i <= n; ++i) {
    const double t = static_cast<double>(i) / n;
    const double u = 1.0 - t;
    out.push_back(u * u * u * p0 + 3 * u * u * t * c0 + 3 * u * t * t * c1 + t * t * t * p1);
  }
  return out;
}

}  // namespace langsim
