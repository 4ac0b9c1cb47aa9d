// Copyright 2026 The LangSim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "langsim/core/error.hpp"
#include "langsim/core/types.hpp"

namespace langsim {

struct OrientedBox {
  Vec2 center{0.0, 0.0};
  double heading = 0.0;
  double length = 4.5;
  double width = 2.0;

  static OrientedBox of(const AgentState& s, const AgentDims& d) {
    return {{s.x, s.y}, s.heading, d.length, d.width};
  }

  std::array<Vec2, 4> corners() const {
    const Vec2 f(std::cos(heading), std::sin(heading));
    const Vec2 l(-f.y(), f.x());
    const double hl = 0.5 * length;
    const double hw = 0.5 * width;
    return {center + hl * f + hw * l, center - hl * f + hw * l, center - hl * f - hw * l,
            center + hl * f - hw * l};
  }

  std::array<Vec2, 2> axes() const {
    const Vec2 f(std::cos(heading), std::sin(heading));
    return {f, Vec2(-f.y(), f.x())};
  }
};

namespace detail {

inline double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double l2 = ab.squaredNorm();
  const double u = l2 > 0.0 ? std::clamp((p - a).dot(ab) / l2, 0.0, 1.0) : 0.0;
  return (p - (a + u * ab)).norm();
}

}  // namespace detail

/// Signed distance between two oriented rectangles: the exact Euclidean gap when
/// separated, otherwise minus the smallest penetration depth over the four
/// separating-axis candidates.
inline double box_signed_distance(const OrientedBox& a, const OrientedBox& b) {
  require(a.length > 0.0 && a.width > 0.0 && b.length > 0.0 && b.width > 0.0,
          "box_signed_distance: degenerate dimensions");
  const auto ca = a.corners();
  const auto cb = b.corners();
  double min_overlap = std::numeric_limits<double>::infinity();
  bool separated = false;
  for (const auto& axes : {a.axes(), b.axes()}) {
    for (const Vec2& ax : axes) {
      double amin = std::numeric_limits<double>::infinity(), amax = -amin;
      double bmin = amin, bmax = -amin;
      for (const Vec2& c : ca) {
        amin = std::min(amin, c.dot(ax));
        amax = std::max(amax, c.dot(ax));
      }
      for (const Vec2& c : cb) {
        bmin = std::min(bmin, c.dot(ax));
        bmax = std::max(bmax, c.dot(ax));
      }
      const double overlap = std::min(amax, bmax) - std::max(amin, bmin);
      if (overlap <= 0.0) separated = true;
      min_overlap = std::min(min_overlap, overlap);
    }
  }
  if (!separated) return -min_overlap;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      best = std::min(best, detail::point_segment_distance(ca[i], cb[j], cb[(j + 1) % 4]));
      best = std::min(best, detail::point_segment_distance(cb[i], ca[j], ca[(j + 1) % 4]));
    }
  }
  return best;
}

inline bool boxes_overlap(const OrientedBox& a, const OrientedBox& b) {
  return box_signed_distance(a, b) < 0.0;
}

}  // namespace langsim
