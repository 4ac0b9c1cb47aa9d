// Copyright 2026 The LangSim Authors
// SPDX-License-Identifier: Apache-2.0
//
// Heuristic behaviour tags and geometric interaction predicates.

#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "langsim/core/types.hpp"
#include "langsim/synth/label_types.hpp"
#include "langsim/synth/map.hpp"
#include "langsim/synth/polyline.hpp"
#include "langsim/synth/scenario.hpp"

namespace langsim {

struct LabelThresholds {
  double static_speed = 0.1;
  double slow_mean_speed = 2.0;
  double speed_delta = 2.0;        // speeding up / slowing down
  double constant_delta = 1.0;
  double turn_angle = kPi / 6.0;
  double approach_distance = 20.0;
  double lane_slack = 0.3;          // metres beyond half lane width still counted as on-lane
  double lane_heading = kPi / 3.0;
  double interaction_range = 50.0;
  double crossing_angle = kPi / 6.0;
  double path_extension = 40.0;
  double follow_fraction = 0.5;
  double follow_range = 50.0;
  double slow_lead_speed = 5.0;
  double stopped_speed = 0.5;
  double head_on_angle = 5.0 * kPi / 6.0;
  double head_on_lateral = 8.0;
};

/// Lane the point is on (nearest compatible centreline), or -1.
inline int lane_at(const MapGraph& map, const Vec2& p, double heading,
                   const LabelThresholds& th = {}) {
  int best = -1;
  double best_d = kInf;
  for (const Lane& lane : map.lanes) {
    const PolylineProjection pr = project(lane.centerline, p);
    if (pr.distance > 0.5 * lane.width + th.lane_slack) continue;
    const auto [q, d] = point_at(lane.centerline, pr.s);
    (void)q;
    if (std::abs(wrap_angle(std::atan2(d.y(), d.x()) - heading)) > th.lane_heading) continue;
    if (pr.distance < best_d) {
      best_d = pr.distance;
      best = lane.id;
    }
  }
  return best;
}

inline LanePos lane_position(const Lane& lane) {
  if (lane.right_neighbor < 0) return LanePos::Rightmost;
  if (lane.left_neighbor < 0) return LanePos::Leftmost;
  return LanePos::Middle;
}

inline bool has_neighbors(const Lane& lane) {
  return lane.left_neighbor >= 0 || lane.right_neighbor >= 0;
}

/// Compressed lane sequence (consecutive duplicates and off-lane samples removed).
inline std::vector<int> lane_sequence(const MapGraph& map, const std::vector<AgentState>& states,
                                      const LabelThresholds& th = {}) {
  std::vector<int> seq;
  for (const AgentState& s : states) {
    const int l = lane_at(map, s.position(), s.heading, th);
    if (l >= 0 && (seq.empty() || seq.back() != l)) seq.push_back(l);
  }
  return seq;
}

/// Behaviour tags for one agent's state sequence, in a fixed canonical order.
inline std::vector<BehaviorTag> heuristic_label(const std::vector<AgentState>& states,
                                                const MapGraph& map,
                                                const LabelThresholds& th = {}) {
  std::vector<BehaviorTag> tags;
  if (states.size() < 2) return tags;
  auto add = [&tags](TagKind k, LanePos a = LanePos::Rightmost, LanePos b = LanePos::Rightmost) {
    tags.push_back({k, a, b});
  };
  bool off_road = false;
  for (const AgentState& s : states) {
    if (map.edges.empty()) break;
    if (signed_edge_distance(map, s.position()) < 0.0) off_road = true;
  }
  const bool is_static = std::all_of(states.begin(), states.end(), [&](const AgentState& s) {
    return std::abs(s.speed) < th.static_speed;
  });
  if (is_static) {
    double lane_d = kInf;
    for (const Lane& lane : map.lanes) {
      lane_d = std::min(lane_d, project(lane.centerline, states.back().position()).distance -
                                    0.5 * lane.width);
    }
    if (lane_d > 0.0) add(TagKind::Parked);
    if (off_road) add(TagKind::OffRoad);
    add(TagKind::Static);
    return tags;
  }
  if (off_road) add(TagKind::OffRoad);

  double mean_v = 0.0;
  for (const AgentState& s : states) mean_v += s.speed;
  mean_v /= static_cast<double>(states.size());
  if (mean_v < th.slow_mean_speed) add(TagKind::MovingSlowly);
  const double dv = states.back().speed - states.front().speed;
  if (dv > th.speed_delta) add(TagKind::SpeedingUp);
  if (dv < -th.speed_delta) add(TagKind::SlowingDown);
  if (std::abs(dv) < th.constant_delta) add(TagKind::ConstantSpeed);

  double turn = 0.0;
  for (size_t t = 1; t < states.size(); ++t) {
    turn += wrap_angle(states[t].heading - states[t - 1].heading);
  }
  if (turn > th.turn_angle) {
    add(TagKind::TurningLeft);
  } else if (turn < -th.turn_angle) {
    add(TagKind::TurningRight);
  } else {
    add(TagKind::GoingStraight);
  }

  if (map.intersection) {
    const IntersectionBox& box = *map.intersection;
    const bool inside = std::any_of(states.begin(), states.end(), [&](const AgentState& s) {
      return box.contains(s.position());
    });
    if (inside) {
      add(TagKind::CrossingIntersection);
    } else {
      auto box_dist = [&box](const Vec2& p) {
        const double dx = std::max(0.0, std::abs(p.x() - box.center.x()) - box.half_size);
        const double dy = std::max(0.0, std::abs(p.y() - box.center.y()) - box.half_size);
        return std::hypot(dx, dy);
      };
      const double d0 = box_dist(states.front().position());
      const double d1 = box_dist(states.back().position());
      if (d1 < th.approach_distance && d1 < d0) add(TagKind::ApproachingIntersection);
    }
  }

  const std::vector<int> seq = lane_sequence(map, states, th);
  const int final_lane = lane_at(map, states.back().position(), states.back().heading, th);
  if (final_lane >= 0 && has_neighbors(map.lane(final_lane))) {
    add(TagKind::LanePosition, lane_position(map.lane(final_lane)));
  }
  for (size_t k = 1; k < seq.size(); ++k) {
    const Lane& a = map.lane(seq[k - 1]);
    if (seq[k] == a.left_neighbor || seq[k] == a.right_neighbor) {
      const BehaviorTag t{TagKind::LaneChange, lane_position(a), lane_position(map.lane(seq[k]))};
      if (std::find(tags.begin(), tags.end(), t) == tags.end()) tags.push_back(t);
    }
  }
  return tags;
}

inline std::vector<AgentState> agent_states(const Trajectory& traj, int agent) {
  std::vector<AgentState> out;
  for (int t = 0; t <= traj.horizon(); ++t) {
    if (traj.valid(agent, t)) out.push_back(traj.state(agent, t));
  }
  return out;
}

inline std::vector<BehaviorTag> heuristic_label(const Trajectory& traj, int agent,
                                                const MapGraph& map,
                                                const LabelThresholds& th = {}) {
  return heuristic_label(agent_states(traj, agent), map, th);
}

namespace detail {

inline std::vector<double> cumulative_arc(const Polyline& pl) {
  std::vector<double> s(pl.size(), 0.0);
  for (size_t i = 1; i < pl.size(); ++i) s[i] = s[i - 1] + (pl[i] - pl[i - 1]).norm();
  return s;
}

struct PathCrossing {
  bool found = false;
  Vec2 point{0.0, 0.0};
  double s_a = 0.0;
  double s_b = 0.0;
};

/// First crossing of path a with path b whose segments meet at more than `min_angle`.
inline PathCrossing crossing_at_angle(const Polyline& a, const Polyline& b, double min_angle) {
  PathCrossing out;
  double acc_a = 0.0;
  for (size_t i = 0; i + 1 < a.size(); ++i) {
    const Vec2 r = a[i + 1] - a[i];
    const double rl = r.norm();
    if (rl < 1e-9) continue;
    double acc_b = 0.0;
    for (size_t j = 0; j + 1 < b.size(); ++j) {
      const Vec2 s = b[j + 1] - b[j];
      const double sl = s.norm();
      if (sl >= 1e-9) {
        const double denom = cross2(r, s);
        const double angle = std::asin(std::min(1.0, std::abs(denom) / (rl * sl)));
        if (angle > min_angle && std::abs(denom) > 1e-12) {
          const double t = cross2(b[j] - a[i], s) / denom;
          const double u = cross2(b[j] - a[i], r) / denom;
          if (t >= 0.0 && t <= 1.0 && u >= 0.0 && u <= 1.0) {
            out.found = true;
            out.point = a[i] + t * r;
            out.s_a = acc_a + t * rl;
            out.s_b = acc_b + u * sl;
            return out;
          }
        }
      }
      acc_b += sl;
    }
    acc_a += rl;
  }
  return out;
}

inline Polyline extended_path(const std::vector<AgentState>& states, double extension) {
  Polyline pl;
  for (const AgentState& s : states) {
    if (pl.empty() || (pl.back() - s.position()).norm() > 1e-6) pl.push_back(s.position());
  }
  const AgentState& last = states.back();
  pl.push_back(last.position() +
               extension * Vec2(std::cos(last.heading), std::sin(last.heading)));
  return pl;
}

/// First time index whose travelled arc length reaches `s`, or -1.
inline int arrival_index(const std::vector<AgentState>& states, double s) {
  double acc = 0.0;
  if (s <= 0.0) return 0;
  for (size_t t = 1; t < states.size(); ++t) {
    acc += (states[t].position() - states[t - 1].position()).norm();
    if (acc >= s) return static_cast<int>(t);
  }
  return -1;
}

inline double longitudinal(const AgentState& from, const AgentState& to) {
  return (to.position() - from.position()).dot(Vec2(std::cos(from.heading), std::sin(from.heading)));
}

inline double lateral(const AgentState& from, const AgentState& to) {
  return (to.position() - from.position())
      .dot(Vec2(-std::sin(from.heading), std::cos(from.heading)));
}

inline std::vector<int> predecessors(const MapGraph& map, int lane) {
  std::vector<int> out;
  for (const Lane& l : map.lanes) {
    if (std::find(l.successors.begin(), l.successors.end(), lane) != l.successors.end()) {
      out.push_back(l.id);
    }
  }
  return out;
}

inline double junction_angle(const MapGraph& map, int from, int to) {
  const Polyline& a = map.lane(from).centerline;
  const Polyline& b = map.lane(to).centerline;
  const Vec2 da = a.back() - a[a.size() - 2];
  const Vec2 db = b[1] - b.front();
  return std::abs(wrap_angle(std::atan2(db.y(), db.x()) - std::atan2(da.y(), da.x())));
}

/// True when `from` is the merging branch into `to` (the predecessor of `to`
/// that joins at the largest angle, with at least one other predecessor).
inline bool is_merge_branch(const MapGraph& map, int from, int to) {
  const auto& succ = map.lane(from).successors;
  if (std::find(succ.begin(), succ.end(), to) == succ.end()) return false;
  const std::vector<int> preds = predecessors(map, to);
  if (preds.size() < 2) return false;
  const double mine = junction_angle(map, from, to);
  if (mine < 5.0 * kPi / 180.0) return false;
  for (int p : preds) {
    if (map.lane(p).role == LaneRole::Connector) return false;
    if (p != from && junction_angle(map, p, to) >= mine) return false;
  }
  return true;
}

}  // namespace detail

/// Classifies how `actor` interacts with `other` over the scenario's future.
inline std::optional<InteractionLabel> interaction_label(const Scenario& sc, int actor, int other,
                                                         const LabelThresholds& th = {}) {
  const int n = sc.agent_count();
  require(actor >= 0 && other >= 0 && actor < n && other < n && actor != other,
          "interaction_label: invalid pair");
  const std::vector<AgentState> si = agent_states(sc.future, actor);
  const std::vector<AgentState> sj = agent_states(sc.future, other);
  if (si.size() < 2 || sj.size() < 2) return std::nullopt;
  const size_t T = std::min(si.size(), sj.size());
  const MapGraph& map = sc.map;

  double min_dist = kInf;
  for (size_t t = 0; t < T; ++t) {
    min_dist = std::min(min_dist, (si[t].position() - sj[t].position()).norm());
  }
  if (min_dist > th.interaction_range) return std::nullopt;

  const std::vector<int> seq_i = lane_sequence(map, si, th);
  const std::vector<int> seq_j = lane_sequence(map, sj, th);

  // Merging: actor moves from a merging branch onto the joined lane near the other.
  for (size_t p = 0; p < seq_i.size(); ++p) {
    for (size_t q = p + 1; q < seq_i.size(); ++q) {
      if (!detail::is_merge_branch(map, seq_i[p], seq_i[q])) continue;
      std::vector<int> zone = detail::predecessors(map, seq_i[q]);
      zone.push_back(seq_i[q]);
      const bool near = std::any_of(seq_j.begin(), seq_j.end(), [&](int l) {
        return std::find(zone.begin(), zone.end(), l) != zone.end();
      });
      if (near) return make_interaction(actor, other, Subtype::StandardMerge);
    }
  }

  // Lane change, and overtaking when the other goes from ahead to behind.
  bool changed = false;
  for (size_t k = 1; k < seq_i.size(); ++k) {
    const Lane& a = map.lane(seq_i[k - 1]);
    if (seq_i[k] == a.left_neighbor || seq_i[k] == a.right_neighbor) changed = true;
  }
  if (changed) {
    const bool ahead_before = detail::longitudinal(si.front(), sj.front()) > 0.0;
    const bool behind_after = detail::longitudinal(si[T - 1], sj[T - 1]) < 0.0;
    if (ahead_before && behind_after) {
      return make_interaction(actor, other, Subtype::StandardOvertaking);
    }
    return make_interaction(actor, other, Subtype::LaneChangeWithLeadOrTrail);
  }

  // Conflict-zone precedence: the intersection box when there is one, else the
  // first crossing of the two (extended) paths.
  const Polyline pi = detail::extended_path(si, th.path_extension);
  const Polyline pj = detail::extended_path(sj, th.path_extension);
  const double approach = std::abs(wrap_angle(si.front().heading - sj.front().heading));
  double arr_i = kInf, arr_j = kInf;
  bool conflict = false;
  bool in_box = false;
  if (map.intersection && approach > th.crossing_angle) {
    const IntersectionBox& box = *map.intersection;
    auto entry = [&box](const std::vector<AgentState>& s) {
      for (size_t t = 0; t < s.size(); ++t) {
        if (box.contains(s[t].position())) return static_cast<double>(t);
      }
      return kInf;
    };
    auto heads_in = [&box](const Polyline& pl) {
      for (size_t k = 0; k + 1 < pl.size(); ++k) {
        for (int m = 0; m <= 20; ++m) {
          if (box.contains(pl[k] + (pl[k + 1] - pl[k]) * (m / 20.0))) return true;
        }
      }
      return false;
    };
    if (heads_in(pi) && heads_in(pj)) {
      conflict = true;
      in_box = true;
      arr_i = entry(si);
      arr_j = entry(sj);
    }
  }
  if (!conflict) {
    const detail::PathCrossing cr = detail::crossing_at_angle(pi, pj, th.crossing_angle);
    if (cr.found) {
      conflict = true;
      const int ai = detail::arrival_index(si, cr.s_a);
      const int aj = detail::arrival_index(sj, cr.s_b);
      arr_i = ai < 0 ? kInf : ai;
      arr_j = aj < 0 ? kInf : aj;
    }
  }
  if (conflict && (std::isfinite(arr_i) || std::isfinite(arr_j))) {
    const size_t until = std::isfinite(arr_i) ? static_cast<size_t>(arr_i) + 1 : si.size();
    double vmin = kInf;
    for (size_t t = 0; t < until; ++t) vmin = std::min(vmin, si[t].speed);
    const bool decel = vmin < std::max(1.0, 0.3 * si.front().speed);
    if (arr_i > arr_j && decel) {
      return make_interaction(actor, other,
                              in_box ? Subtype::IntersectionYielding : Subtype::YieldingToMerging);
    }
    if (arr_i < arr_j && !decel) {
      return make_interaction(actor, other,
                              in_box ? Subtype::PassingIntersection : Subtype::PassingAsLeader);
    }
  }

  // Same-lane following.
  int follow_steps = 0;
  for (size_t t = 0; t < T; ++t) {
    const int li = lane_at(map, si[t].position(), si[t].heading, th);
    const int lj = lane_at(map, sj[t].position(), sj[t].heading, th);
    const double lon = detail::longitudinal(si[t], sj[t]);
    if (li >= 0 && li == lj && lon > 0.0 && lon < th.follow_range) ++follow_steps;
  }
  if (follow_steps >= th.follow_fraction * static_cast<double>(T)) {
    double mean_j = 0.0;
    for (size_t t = 0; t < T; ++t) mean_j += sj[t].speed;
    mean_j /= static_cast<double>(T);
    if (si[T - 1].speed < th.stopped_speed && sj[T - 1].speed < th.stopped_speed) {
      return make_interaction(actor, other, Subtype::StoppingBehindLead);
    }
    if (mean_j < th.slow_lead_speed) return make_interaction(actor, other, Subtype::FollowingSlowLead);
    return make_interaction(actor, other, Subtype::FollowingLead);
  }

  // Opposite-direction passing.
  const double dh = std::abs(wrap_angle(si.front().heading - sj.front().heading));
  if (dh > th.head_on_angle && std::abs(detail::lateral(si.front(), sj.front())) < th.head_on_lateral &&
      detail::longitudinal(si.front(), sj.front()) > 0.0 &&
      detail::longitudinal(si[T - 1], sj[T - 1]) < 0.0) {
    return make_interaction(actor, other, Subtype::MaintainingSpeed);
  }
  return std::nullopt;
}

inline std::optional<InteractionLabel> interaction_label(const Scenario& sc,
                                                         std::pair<int, int> pair,
                                                         const LabelThresholds& th = {}) {
  return interaction_label(sc, pair.first, pair.second, th);
}

}  // namespace langsim
