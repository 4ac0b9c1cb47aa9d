// Copyright 2026 The LangSim Authors
// SPDX-License-Identifier: Apache-2.0
//
// Synthetic lane graphs. Road edges are oriented so the drivable region lies
// to the LEFT of the direction of travel along the edge.

#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "langsim/core/error.hpp"
#include "langsim/core/types.hpp"
#include "langsim/synth/polyline.hpp"

namespace langsim {

enum class Layout { Straight, TwoLane, CrossIntersection, MergeRamp };

inline std::string to_string(Layout l) {
  switch (l) {
    case Layout::Straight: return "straight";
    case Layout::TwoLane: return "two_lane";
    case Layout::CrossIntersection: return "cross_intersection";
    case Layout::MergeRamp: return "merge_ramp";
  }
  return "unknown";
}

inline Layout layout_from_string(const std::string& s) {
  if (s == "straight") return Layout::Straight;
  if (s == "two_lane") return Layout::TwoLane;
  if (s == "cross_intersection") return Layout::CrossIntersection;
  if (s == "merge_ramp") return Layout::MergeRamp;
  throw InvalidInput("unknown layout: " + s);
}

enum class LaneRole { Through, Incoming, Outgoing, Connector, Ramp };

struct Lane {
  int id = 0;
  Polyline centerline;
  double width = 3.5;
  std::vector<int> successors;
  int left_neighbor = -1;   // same-direction lane to the left, or -1
  int right_neighbor = -1;  // same-direction lane to the right, or -1
  LaneRole role = LaneRole::Through;
};

struct RoadEdge {
  Polyline points;
};

struct IntersectionBox {
  Vec2 center{0.0, 0.0};
  double half_size = 10.0;

  bool contains(const Vec2& p, double margin = 0.0) const {
    return std::abs(p.x() - center.x()) <= half_size + margin &&
           std::abs(p.y() - center.y()) <= half_size + margin;
  }
};

struct MapGraph {
  Layout layout = Layout::Straight;
  std::vector<Lane> lanes;
  std::vector<RoadEdge> edges;
  std::optional<IntersectionBox> intersection;

  const Lane& lane(int id) const {
    require(id >= 0 && id < static_cast<int>(lanes.size()), "MapGraph: bad lane id");
    return lanes[static_cast<size_t>(id)];
  }
};

struct MapParams {
  double length = 200.0;     // Straight / TwoLane / MergeRamp road length
  int lanes = 2;             // Straight: same-direction lane count
  double lane_width = 3.5;
  double arm = 80.0;         // CrossIntersection arm length from the centre
  double box_half = 10.0;    // CrossIntersection box half size
  double merge_x = 120.0;    // MergeRamp join point along the main road
  double ramp_length = 70.0;
  double ramp_angle = 0.25;  // radians
};

namespace detail {

inline Polyline line(const Vec2& a, const Vec2& b, double spacing = 2.0) {
  return resample({a, b}, spacing);
}

inline Polyline arc(const Vec2& c, double r, double a0, double a1, int n) {
  Polyline out;
  for (int i = 0; i <= n; ++i) {
    const double a = a0 + (a1 - a0) * i / n;
    out.emplace_back(c.x() + r * std::cos(a), c.y() + r * std::sin(a));
  }
  return out;
}

inline Vec2 rot90(const Vec2& v) { return {-v.y(), v.x()}; }

inline MapGraph build_straight(const MapParams& p) {
  require(p.lanes >= 1, "build_map: lanes must be >= 1");
  MapGraph m;
  m.layout = Layout::Straight;
  for (int i = 0; i < p.lanes; ++i) {
    Lane lane;
    lane.id = i;
    lane.width = p.lane_width;
    const double y = (i + 0.5) * p.lane_width;
    lane.centerline = line({0.0, y}, {p.length, y});
    lane.left_neighbor = i + 1 < p.lanes ? i + 1 : -1;
    lane.right_neighbor = i - 1;
    m.lanes.push_back(std::move(lane));
  }
  const double top = p.lanes * p.lane_width;
  m.edges.push_back({line({0.0, 0.0}, {p.length, 0.0}, 10.0)});
  m.edges.push_back({line({p.length, top}, {0.0, top}, 10.0)});
  return m;
}

inline MapGraph build_two_lane(const MapParams& p) {
  MapGraph m;
  m.layout = Layout::TwoLane;
  const double w = p.lane_width;
  Lane east;
  east.id = 0;
  east.width = w;
  east.centerline = line({0.0, -0.5 * w}, {p.length, -0.5 * w});
  Lane west;
  west.id = 1;
  west.width = w;
  west.centerline = line({p.length, 0.5 * w}, {0.0, 0.5 * w});
  m.lanes = {east, west};
  m.edges.push_back({line({0.0, -w}, {p.length, -w}, 10.0)});
  m.edges.push_back({line({p.length, w}, {0.0, w}, 10.0)});
  return m;
}

// Arms are ordered E, N, W, S. Lane ids: incoming(arm) = 2*arm, outgoing(arm) = 2*arm + 1,
// connectors follow from id 8 in (from, to) order.
inline MapGraph build_cross(const MapParams& p) {
  require(p.box_half > p.lane_width, "build_map: intersection box must exceed lane width");
  require(p.arm > p.box_half, "build_map: arm must exceed the box half size");
  MapGraph m;
  m.layout = Layout::CrossIntersection;
  m.intersection = IntersectionBox{{0.0, 0.0}, p.box_half};
  const double w = p.lane_width;
  const double b = p.box_half;
  const std::array<Vec2, 4> out_dir = {Vec2(1, 0), Vec2(0, 1), Vec2(-1, 0), Vec2(0, -1)};

  for (int a = 0; a < 4; ++a) {
    const Vec2 u = out_dir[a];
    const Vec2 n = rot90(u);
    Lane in;
    in.id = 2 * a;
    in.width = w;
    in.role = LaneRole::Incoming;
    in.centerline = line(p.arm * u + 0.5 * w * n, b * u + 0.5 * w * n);
    Lane out;
    out.id = 2 * a + 1;
    out.width = w;
    out.role = LaneRole::Outgoing;
    out.centerline = line(b * u - 0.5 * w * n, p.arm * u - 0.5 * w * n);
    m.lanes.push_back(std::move(in));
    m.lanes.push_back(std::move(out));
  }
  for (int from = 0; from < 4; ++from) {
    for (int to = 0; to < 4; ++to) {
      if (to == from) continue;
      const Vec2 uf = out_dir[from];
      const Vec2 ut = out_dir[to];
      const Vec2 p0 = b * uf + 0.5 * w * rot90(uf);
      const Vec2 p1 = b * ut - 0.5 * w * rot90(ut);
      const Vec2 t0 = -uf;
      const Vec2 t1 = ut;
      Polyline cl;
      if ((t0 - t1).norm() < 1e-9) {
        cl = line(p0, p1, 1.0);
      } else {
        // Quarter turn approximated by a cubic Bezier with circular handles.
        const Vec2 corner = p0 + t0 * (p1 - p0).dot(t0);
        const double r = (corner - p0).norm();
        const double h = 0.5523 * r;
        cl = bezier(p0, p0 + h * t0, p1 - h * t1, p1, 24);
      }
      Lane c;
      c.id = static_cast<int>(m.lanes.size());
      c.width = w;
      c.role = LaneRole::Connector;
      c.centerline = std::move(cl);
      m.lanes[2 * from].successors.push_back(c.id);
      c.successors.push_back(2 * to + 1);
      m.lanes.push_back(std::move(c));
    }
  }
  // Each corner between arm a (outward u) and the arm at rot90(u) is bounded by
  // one edge chain; it is split at the arc midpoint so every arm side owns one edge.
  for (int a = 0; a < 4; ++a) {
    const Vec2 u = out_dir[a];
    const Vec2 n = rot90(u);
    const Vec2 c = b * u + b * n;
    const double r = b - w;
    const double a_start = std::atan2(-n.y(), -n.x());
    const double a_mid = a_start - 0.25 * kPi;
    const double a_end = a_start - 0.5 * kPi;
    Polyline first = line(p.arm * u + w * n, b * u + w * n, 10.0);
    append_polyline(first, arc(c, r, a_start, a_mid, 8));
    Polyline second = arc(c, r, a_mid, a_end, 8);
    append_polyline(second, line(b * n + w * u, p.arm * n + w * u, 10.0));
    m.edges.push_back({std::move(first)});
    m.edges.push_back({std::move(second)});
  }
  return m;
}

inline MapGraph build_merge(const MapParams& p) {
  require(p.ramp_angle > 0.0 && p.ramp_angle < 0.5 * kPi, "build_map: ramp angle out of range");
  require(p.merge_x > p.ramp_length * std::cos(p.ramp_angle) && p.merge_x < p.length,
          "build_map: merge point out of range");
  MapGraph m;
  m.layout = Layout::MergeRamp;
  const double w = p.lane_width;
  const Vec2 d(std::cos(p.ramp_angle), std::sin(p.ramp_angle));
  const Vec2 n = rot90(d);
  const Vec2 join(p.merge_x, 0.0);
  const Vec2 ramp_start = join - p.ramp_length * d;

  Lane up;
  up.id = 0;
  up.width = w;
  up.centerline = line({0.0, 0.0}, join);
  up.successors = {1};
  Lane down;
  down.id = 1;
  down.width = w;
  down.centerline = line(join, {p.length, 0.0});
  Lane ramp;
  ramp.id = 2;
  ramp.width = w;
  ramp.role = LaneRole::Ramp;
  ramp.centerline = line(ramp_start, join);
  ramp.successors = {1};
  m.lanes = {up, down, ramp};

  // Gore tip: ramp left edge meets the main road's lower edge.
  const double back_tip = 0.5 * w * (1.0 + std::cos(p.ramp_angle)) / std::sin(p.ramp_angle);
  const Vec2 tip = join - back_tip * d + 0.5 * w * n;
  const double back_low = 0.5 * w * (1.0 - std::cos(p.ramp_angle)) / std::sin(p.ramp_angle);
  const Vec2 low_join = join - back_low * d - 0.5 * w * n;

  m.edges.push_back({line({p.length, 0.5 * w}, {0.0, 0.5 * w}, 10.0)});
  Polyline gore = line({0.0, -0.5 * w}, tip, 10.0);
  append_polyline(gore, line(tip, ramp_start + 0.5 * w * n, 10.0));
  m.edges.push_back({std::move(gore)});
  Polyline lower = line(ramp_start - 0.5 * w * n, low_join, 10.0);
  append_polyline(lower, line(low_join, {p.length, -0.5 * w}, 10.0));
  m.edges.push_back({std::move(lower)});
  return m;
}

}  // namespace detail

inline MapGraph build_map(Layout layout, const MapParams& p = {}) {
  require(p.length > 0.0 && p.lane_width > 0.0 && p.arm > 0.0 && p.box_half > 0.0 &&
              p.ramp_length > 0.0 && p.merge_x > 0.0,
          "build_map: geometric parameters must be positive");
  switch (layout) {
    case Layout::Straight: return detail::build_straight(p);
    case Layout::TwoLane: return detail::build_two_lane(p);
    case Layout::CrossIntersection: return detail::build_cross(p);
    case Layout::MergeRamp: return detail::build_merge(p);
  }
  throw InvalidInput("build_map: unknown layout");
}

/// Signed distance from a point to the nearest road edge; positive on the drivable side.
///
/// Segments tied for the minimum (shared vertices) vote with their left normals,
/// which resolves the sign at convex and concave joints.
inline double signed_edge_distance(const MapGraph& map, const Vec2& p) {
  double best = std::numeric_limits<double>::infinity();
  for (const RoadEdge& e : map.edges) {
    for (size_t i = 0; i + 1 < e.points.size(); ++i) {
      const Vec2& a = e.points[i];
      const Vec2& b = e.points[i + 1];
      best = std::min(best, (p - (a + project_on_segment(p, a, b) * (b - a))).norm());
    }
  }
  if (!std::isfinite(best)) return best;
  double vote = 0.0;
  for (const RoadEdge& e : map.edges) {
    for (size_t i = 0; i + 1 < e.points.size(); ++i) {
      const Vec2& a = e.points[i];
      const Vec2& b = e.points[i + 1];
      const Vec2 foot = a + project_on_segment(p, a, b) * (b - a);
      if ((p - foot).norm() <= best + 1e-9) {
        const Vec2 normal = left_of((b - a).normalized());
        vote += best > 1e-12 ? (p - foot).dot(normal) : 1.0;
      }
    }
  }
  return vote >= 0.0 ? best : -best;
}

/// Lane centreline samples with tangent directions (for scene features).
struct LanePoint {
  Vec2 position;
  Vec2 direction;
};

inline std::vector<LanePoint> lane_sample_points(const MapGraph& map, double spacing) {
  std::vector<LanePoint> pts;
  for (const Lane& lane : map.lanes) {
    const double len = polyline_length(lane.centerline);
    const int n = std::max(1, static_cast<int>(std::floor(len / spacing)));
    for (int i = 0; i <= n; ++i) {
      const auto [p, d] = point_at(lane.centerline, std::min(len, i * spacing));
      pts.push_back({p, d});
    }
  }
  return pts;
}

}  // namespace langsim
