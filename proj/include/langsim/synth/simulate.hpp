// Copyright 2026 The LangSim Authors
// SPDX-License-Identifier: Apache-2.0
//
// Rule-based ground-truth driver: pure-pursuit lane following, IDM car
// following, scripted lane changes, stop-line yielding and timed stops.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "langsim/core/dynamics.hpp"
#include "langsim/core/error.hpp"
#include "langsim/core/geometry.hpp"
#include "langsim/core/rng.hpp"
#include "langsim/core/types.hpp"
#include "langsim/synth/idm.hpp"
#include "langsim/synth/map.hpp"
#include "langsim/synth/polyline.hpp"
#include "langsim/synth/scenario.hpp"

namespace langsim {

struct LaneChangePlan {
  double start_time = 0.0;  // seconds, relative to the current time t = 0
  std::vector<int> route;   // route continuing from the target lane
  double duration = 4.0;
  int trigger_ahead_of = -1;  // if set, also wait until this far ahead of that agent
  double ahead_margin = 0.0;
};

struct AgentSpec {
  std::vector<int> route;
  double start_s = 0.0;  // arc length along the route at the first history step
  double start_speed = 10.0;
  AgentDims dims;
  IdmParams idm;
  std::vector<LaneChangePlan> lane_changes;
  int yield_to = -1;
  double stop_time = kInf;          // desired speed drops to zero from this time on
  double speed_change_time = kInf;  // desired speed switches to new_speed from this time on
  double new_speed = 0.0;
};

struct BehaviorScript {
  ScriptKind kind = ScriptKind::Follow;
  std::pair<int, int> interest_pair{0, 1};
};

/// Concatenated centreline of a lane sequence.
struct RoutePath {
  std::vector<int> lanes;
  Polyline line;
  std::vector<double> lane_start;  // arc length at which each lane begins
  double length = 0.0;

  RoutePath() = default;
  RoutePath(const MapGraph& map, const std::vector<int>& route) : lanes(route) {
    require(!route.empty(), "RoutePath: empty route");
    for (size_t k = 0; k < route.size(); ++k) {
      const Lane& lane = map.lane(route[k]);
      if (k > 0) {
        const auto& succ = map.lane(route[k - 1]).successors;
        require(std::find(succ.begin(), succ.end(), route[k]) != succ.end(),
                "RoutePath: lanes are not connected");
      }
      lane_start.push_back(polyline_length(line));
      append_polyline(line, lane.centerline);
    }
    length = polyline_length(line);
  }

  int lane_index_at(double s) const {
    int k = 0;
    for (size_t i = 0; i < lane_start.size(); ++i) {
      if (s >= lane_start[i]) k = static_cast<int>(i);
    }
    return k;
  }
};

namespace detail {

struct Crossing {
  double s_a = kInf;
  double s_b = kInf;
};

/// First intersection of two polylines along the first one.
inline Crossing first_crossing(const Polyline& a, const Polyline& b) {
  Crossing best;
  double acc_a = 0.0;
  for (size_t i = 0; i + 1 < a.size(); ++i) {
    const Vec2 p = a[i];
    const Vec2 r = a[i + 1] - a[i];
    double acc_b = 0.0;
    for (size_t j = 0; j + 1 < b.size(); ++j) {
      const Vec2 q = b[j];
      const Vec2 s = b[j + 1] - b[j];
      const double denom = cross2(r, s);
      if (std::abs(denom) > 1e-12) {
        const double t = cross2(q - p, s) / denom;
        const double u = cross2(q - p, r) / denom;
        if (t >= 0.0 && t <= 1.0 && u >= 0.0 && u <= 1.0) {
          const double sa = acc_a + t * r.norm();
          if (sa < best.s_a) best = {sa, acc_b + u * s.norm()};
        }
      }
      acc_b += s.norm();
    }
    if (std::isfinite(best.s_a)) return best;
    acc_a += r.norm();
  }
  return best;
}

inline double smoothstep(double x) {
  x = std::clamp(x, 0.0, 1.0);
  return x * x * (3.0 - 2.0 * x);
}

struct Runtime {
  RoutePath path;
  double s = 0.0;
  size_t next_lc = 0;
  double lc_t0 = -kInf;
  double lc_duration = 1.0;
  double offset0 = 0.0;
  // Yield bookkeeping, in this agent's and the yielded-to agent's route arc lengths.
  double stop_s = kInf;
  double conflict_other = kInf;
};

}  // namespace detail

struct SimulationParams {
  double dt = kDefaultDt;
  int history_steps = kHistorySteps;
  int future_steps = kFutureSteps;
  double lateral_accel = 3.0;     // curve speed limit
  double max_brake = 6.0;         // controller deceleration limit (emergency brake uses a_max)
  double yield_clearance = 4.0;   // extra distance the yielded-to agent must clear
  double speed_jitter = 0.02;     // relative desired-speed perturbation drawn from the seed
  ActionBounds bounds;
};

/// Runs the rule-based driver and returns a Scenario with history and future
/// filled in (labels and prompts are left empty).
inline Scenario simulate_scenario(const MapGraph& map, const std::vector<AgentSpec>& specs,
                                  const BehaviorScript& script, std::uint64_t seed,
                                  const SimulationParams& sp = {}) {
  const int n = static_cast<int>(specs.size());
  require(n >= 1, "simulate_scenario: need at least one agent");
  require(n == 1 || (script.interest_pair.first != script.interest_pair.second &&
                     script.interest_pair.first >= 0 && script.interest_pair.second >= 0 &&
                     script.interest_pair.first < n && script.interest_pair.second < n),
          "simulate_scenario: invalid interest pair");
  const int steps = sp.history_steps + sp.future_steps;
  const double dt = sp.dt;
  Rng rng(derive_seed(seed, 0x51u));

  std::vector<detail::Runtime> rt(static_cast<size_t>(n));
  std::vector<IdmParams> idm(static_cast<size_t>(n));
  std::vector<std::vector<AgentState>> states(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const AgentSpec& a = specs[static_cast<size_t>(i)];
    rt[i].path = RoutePath(map, a.route);
    rt[i].s = a.start_s;
    require(a.start_s >= 0.0 && a.start_s <= rt[i].path.length,
            "simulate_scenario: spawn is not on the route");
    idm[i] = a.idm;
    idm[i].v0 *= 1.0 + sp.speed_jitter * (2.0 * rng.uniform() - 1.0);
    const auto [p, d] = point_at(rt[i].path.line, a.start_s);
    states[i].push_back({p.x(), p.y(), std::atan2(d.y(), d.x()), a.start_speed});
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (boxes_overlap(OrientedBox::of(states[i][0], specs[i].dims),
                        OrientedBox::of(states[j][0], specs[j].dims))) {
        throw InvalidInput("simulate_scenario: spawn collision between agents " +
                           std::to_string(i) + " and " + std::to_string(j));
      }
    }
  }
  auto setup_yield = [&](int i) {
    const int j = specs[static_cast<size_t>(i)].yield_to;
    if (j < 0) return;
    require(j < n && j != i, "simulate_scenario: bad yield target");
    const RoutePath& pi = rt[i].path;
    const RoutePath& pj = rt[j].path;
    const detail::Crossing c = detail::first_crossing(pi.line, pj.line);
    double ci = c.s_a, cj = c.s_b;
    if (!std::isfinite(ci)) {
      for (size_t k = 0; k < pi.lanes.size() && !std::isfinite(ci); ++k) {
        for (size_t m = 0; m < pj.lanes.size(); ++m) {
          if (pi.lanes[k] == pj.lanes[m]) {
            ci = pi.lane_start[k];
            cj = pj.lane_start[m];
            break;
          }
        }
      }
    }
    if (!std::isfinite(ci)) return;
    // Stop at the end of the first lane (intersection entry), never past the conflict.
    double stop = ci - 2.0;
    if (pi.lanes.size() > 1) stop = std::min(stop, pi.lane_start[1] - 0.5);
    rt[i].stop_s = stop;
    rt[i].conflict_other = cj;
  };
  for (int i = 0; i < n; ++i) setup_yield(i);

  for (int k = 0; k < steps; ++k) {
    const double t = (k - sp.history_steps) * dt;
    std::vector<Action> act(static_cast<size_t>(n));
    // Arc-length bookkeeping and lane-change triggers.
    for (int i = 0; i < n; ++i) {
      detail::Runtime& r = rt[i];
      const AgentState& st = states[i][k];
      r.s = project(r.path.line, st.position(), r.s - 10.0, r.s + 40.0).s;
      const AgentSpec& a = specs[static_cast<size_t>(i)];
      if (r.next_lc < a.lane_changes.size()) {
        const LaneChangePlan& lc = a.lane_changes[r.next_lc];
        bool go = t >= lc.start_time - 1e-9;
        if (go && lc.trigger_ahead_of >= 0) {
          const AgentState& o = states[lc.trigger_ahead_of][k];
          const Vec2 f(std::cos(st.heading), std::sin(st.heading));
          go = (st.position() - o.position()).dot(f) >= lc.ahead_margin;
        }
        if (go) {
          r.path = RoutePath(map, lc.route);
          const PolylineProjection pr = project(r.path.line, st.position());
          r.s = pr.s;
          r.offset0 = pr.lateral;
          r.lc_t0 = t;
          r.lc_duration = lc.duration;
          ++r.next_lc;
        }
      }
    }
    for (int i = 0; i < n; ++i) {
      const detail::Runtime& r = rt[i];
      const AgentSpec& a = specs[static_cast<size_t>(i)];
      const AgentState& st = states[i][k];
      const double v = st.speed;

      // Lateral: pure pursuit on the route with a decaying lane-change offset.
      const double ld = std::clamp(0.6 * v + 2.0, 3.0, 12.0);
      const double t_look = t + ld / std::max(v, 1.0);
      const double off =
          r.offset0 * (1.0 - detail::smoothstep((t_look - r.lc_t0) / r.lc_duration));
      const auto [tp, td] = point_at(r.path.line, r.s + ld);
      const Vec2 target = tp + off * left_of(td);
      const Vec2 rel = target - st.position();
      const double alpha = wrap_angle(std::atan2(rel.y(), rel.x()) - st.heading);
      const double yaw = 2.0 * v * std::sin(alpha) / ld;

      // Longitudinal: IDM against the nearest leader on a shared lane.
      IdmParams p = idm[i];
      if (t >= a.speed_change_time) p.v0 = std::max(0.5, a.new_speed);
      double kappa = 0.0;
      const double horizon = std::max(20.0, 2.5 * v);
      for (double ds = 0.0; ds <= horizon; ds += 2.0) {
        kappa = std::max(kappa, curvature_at(r.path.line, r.s + ds));
      }
      if (kappa > 1e-6) p.v0 = std::min(p.v0, std::max(1.0, std::sqrt(sp.lateral_accel / kappa)));
      double gap = kInf, v_lead = v;
      const int li = r.path.lane_index_at(r.s);
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        const detail::Runtime& o = rt[j];
        // An agent holding at its stop line for us is not our leader.
        if (specs[j].yield_to == i && o.s + 0.5 * specs[j].dims.length < o.stop_s + 1.0) continue;
        const int lj = o.path.lane_index_at(o.s);
        bool found = false;
        for (size_t ki = static_cast<size_t>(li); ki < r.path.lanes.size() && !found; ++ki) {
          for (size_t kj = static_cast<size_t>(lj); kj < o.path.lanes.size(); ++kj) {
            if (r.path.lanes[ki] != o.path.lanes[kj]) continue;
            found = true;
            const double di = r.path.lane_start[ki] - r.s;
            const double dj = o.path.lane_start[kj] - o.s;
            if (dj < di) {
              const double g = di - dj - 0.5 * (a.dims.length + specs[j].dims.length);
              if (g < gap && di - dj < 150.0) {
                gap = g;
                v_lead = states[j][k].speed;
              }
            }
            break;
          }
        }
      }
      double acc = std::isfinite(gap) ? idm_accel(gap, v, v_lead, p, sp.bounds)
                                      : idm_accel(1e6, v, v, p, sp.bounds);
      if (std::isfinite(r.stop_s)) {
        const int j = a.yield_to;
        const bool cleared =
            rt[j].s >= r.conflict_other + 0.5 * specs[j].dims.length + sp.yield_clearance;
        const double stop_gap = r.stop_s - (r.s + 0.5 * a.dims.length);
        if (!cleared && stop_gap > -1.0) {
          acc = std::min(acc, idm_accel(std::max(stop_gap, 1e-3), v, 0.0, p, sp.bounds));
          // Hold at the line.
          if (stop_gap < p.s0 + 1.0 || (v < 0.5 && stop_gap < 15.0)) {
            acc = std::min(acc, -std::min(sp.max_brake, v / dt));
          }
        }
      }
      if (t >= a.stop_time) acc = -std::min(p.b, v / dt);
      acc = std::clamp(acc, -sp.max_brake, sp.bounds.max_accel);
      if (std::isfinite(gap) && gap <= 0.0) acc = -sp.bounds.max_accel;
      act[i] = sp.bounds.clamp({acc, yaw});
    }
    for (int i = 0; i < n; ++i) states[i].push_back(step_unicycle(states[i][k], act[i], dt));
  }

  Scenario sc;
  sc.map = map;
  sc.script = script.kind;
  sc.seed = seed;
  sc.interest_pair = n >= 2 ? script.interest_pair : std::pair<int, int>{0, 0};
  sc.history = Trajectory(n, sp.history_steps, dt);
  sc.future = Trajectory(n, sp.future_steps, dt);
  for (int i = 0; i < n; ++i) {
    sc.agent_dims.push_back(specs[static_cast<size_t>(i)].dims);
    const std::vector<Action> acts = inverse_dynamics(states[i], dt, sp.bounds);
    for (int k = 0; k <= steps; ++k) {
      if (k <= sp.history_steps) sc.history.state(i, k) = states[i][k];
      if (k >= sp.history_steps) sc.future.state(i, k - sp.history_steps) = states[i][k];
      if (k < steps) {
        if (k < sp.history_steps) {
          sc.history.action(i, k) = acts[k];
        } else {
          sc.future.action(i, k - sp.history_steps) = acts[k];
        }
      }
    }
  }
  sc.labels.tags.assign(static_cast<size_t>(n), {});
  sc.prompts.assign(static_cast<size_t>(n), PromptText{});
  for (int i = 0; i < n; ++i) sc.prompts[i].target_agent = i;
  return sc;
}

}  // namespace langsim
