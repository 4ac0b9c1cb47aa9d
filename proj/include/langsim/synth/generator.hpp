// Copyright 2026 The LangSim Authors
// SPDX-License-Identifier: Apache-2.0
//
// Randomised scripted scenarios: each script places an actor/other pair (plus
// optional background traffic) on a suitable map, runs the rule-based driver,
// rejects unsafe or off-road outcomes, then attaches labels and prompts.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "langsim/core/error.hpp"
#include "langsim/core/geometry.hpp"
#include "langsim/core/rng.hpp"
#include "langsim/costs/collision.hpp"
#include "langsim/language/prompt.hpp"
#include "langsim/synth/labels.hpp"
#include "langsim/synth/map.hpp"
#include "langsim/synth/scenario.hpp"
#include "langsim/synth/simulate.hpp"

namespace langsim {

struct GeneratorParams {
  int max_background = 2;
  int max_attempts = 80;
  double edge_margin = 0.2;
  SimulationParams sim;
  LabelThresholds thresholds;
};

namespace detail {

inline AgentDims random_dims(Rng& rng) {
  return {rng.uniform(4.2, 5.0), rng.uniform(1.8, 2.1)};
}

inline AgentSpec make_spec(std::vector<int> route, double s, double v, double v0, AgentDims dims) {
  AgentSpec a;
  a.route = std::move(route);
  a.start_s = s;
  a.start_speed = v;
  a.idm.v0 = v0;
  a.dims = dims;
  return a;
}

inline int cross_connector(int from, int to) { return 8 + from * 3 + (to > from ? to - 1 : to); }

inline std::vector<int> cross_route(int from, int to) {
  return {2 * from, cross_connector(from, to), 2 * to + 1};
}

/// Appends up to `count` followers behind randomly chosen existing agents.
inline void add_background(std::vector<AgentSpec>& specs, const std::vector<int>& leaders, int count,
                           Rng& rng) {
  for (int b = 0; b < count; ++b) {
    const int lead = leaders[static_cast<size_t>(rng.uniform_int(0, static_cast<int>(leaders.size()) - 1))];
    // Queue behind the last agent already following this route.
    double back = specs[static_cast<size_t>(lead)].start_s;
    double v = specs[static_cast<size_t>(lead)].start_speed;
    for (const AgentSpec& s : specs) {
      if (s.route == specs[static_cast<size_t>(lead)].route && s.start_s < back) {
        back = s.start_s;
        v = s.start_speed;
      }
    }
    const double s = back - rng.uniform(16.0, 26.0);
    if (s < 0.0) continue;
    AgentSpec f = make_spec(specs[static_cast<size_t>(lead)].route, s, std::max(0.0, v + rng.uniform(-1.0, 1.0)),
                            rng.uniform(10.0, 14.0), random_dims(rng));
    f.yield_to = specs[static_cast<size_t>(lead)].yield_to;
    specs.push_back(std::move(f));
  }
}

struct Draft {
  MapGraph map;
  MapParams params;
  std::vector<AgentSpec> specs;
  BehaviorScript script;
};

inline Draft draft_scenario(ScriptKind kind, Rng& rng, int max_background) {
  Draft d;
  d.script.kind = kind;
  d.script.interest_pair = {0, 1};
  const int n_bg = rng.uniform_int(0, std::max(0, max_background));
  switch (kind) {
    case ScriptKind::Follow: {
      d.params.length = 320.0;
      d.params.lanes = rng.uniform_int(2, 3);
      d.map = build_map(Layout::Straight, d.params);
      const int lane = rng.uniform_int(0, d.params.lanes - 1);
      const double variant = rng.uniform();
      const double lead_s = rng.uniform(60.0, 90.0);
      const double gap = rng.uniform(14.0, 28.0);
      double lead_v0 = rng.uniform(9.0, 13.0);
      double lead_v = lead_v0 + rng.uniform(-1.0, 1.0);
      double foll_v = lead_v + rng.uniform(-1.0, 2.0);
      if (variant > 0.8) {
        lead_v0 = rng.uniform(2.5, 4.5);
        lead_v = lead_v0;
        foll_v = rng.uniform(5.0, 8.0);
      }
      AgentSpec follower =
          make_spec({lane}, lead_s - gap, foll_v, rng.uniform(12.0, 16.0), random_dims(rng));
      AgentSpec leader = make_spec({lane}, lead_s, lead_v, lead_v0, random_dims(rng));
      if (variant > 0.6 && variant <= 0.8) leader.stop_time = rng.uniform(-0.5, 2.0);
      d.specs = {follower, leader};
      add_background(d.specs, {0}, n_bg, rng);
      break;
    }
    case ScriptKind::LaneChange: {
      d.params.length = 320.0;
      d.params.lanes = rng.uniform_int(2, 3);
      d.map = build_map(Layout::Straight, d.params);
      const int lane = rng.uniform_int(0, d.params.lanes - 1);
      int target = lane + (rng.bernoulli(0.5) ? 1 : -1);
      if (target < 0 || target >= d.params.lanes) target = lane == 0 ? 1 : lane - 1;
      const double s_actor = rng.uniform(50.0, 80.0);
      const bool lead = rng.bernoulli(0.5);
      const double v_other = rng.uniform(10.0, 13.0);
      double s_other, v_actor;
      if (lead) {
        s_other = s_actor + rng.uniform(16.0, 28.0);
        v_actor = v_other + rng.uniform(-1.5, 0.5);
      } else {
        s_other = s_actor - rng.uniform(16.0, 24.0);
        v_actor = v_other + rng.uniform(0.0, 1.5);
      }
      AgentSpec actor = make_spec({lane}, s_actor, v_actor, v_actor + rng.uniform(-0.5, 0.5), random_dims(rng));
      LaneChangePlan lc;
      lc.start_time = rng.uniform(0.0, 2.0);
      lc.duration = rng.uniform(3.0, 4.5);
      lc.route = {target};
      actor.lane_changes.push_back(lc);
      AgentSpec other = make_spec({target}, s_other, v_other, v_other, random_dims(rng));
      d.specs = {actor, other};
      add_background(d.specs, {1}, n_bg, rng);
      break;
    }
    case ScriptKind::Overtake: {
      d.params.length = 320.0;
      d.params.lanes = 2;
      d.map = build_map(Layout::Straight, d.params);
      const double s_slow = rng.uniform(70.0, 90.0);
      const double v_slow = rng.uniform(4.0, 7.0);
      const double v_fast = v_slow + rng.uniform(6.0, 9.0);
      AgentSpec actor =
          make_spec({0}, s_slow - rng.uniform(26.0, 34.0), v_fast, v_fast, random_dims(rng));
      LaneChangePlan out;
      out.start_time = -1.0;
      out.duration = 2.5;
      out.route = {1};
      LaneChangePlan back;
      back.start_time = -1.0;
      back.duration = 3.0;
      back.route = {0};
      back.trigger_ahead_of = 1;
      back.ahead_margin = 5.0 + rng.uniform(6.0, 10.0);
      actor.lane_changes = {out, back};
      AgentSpec slow = make_spec({0}, s_slow, v_slow, v_slow, random_dims(rng));
      d.specs = {actor, slow};
      add_background(d.specs, {1}, n_bg, rng);
      break;
    }
    case ScriptKind::Yield:
    case ScriptKind::Pass: {
      d.params.arm = 80.0;
      d.map = build_map(Layout::CrossIntersection, d.params);
      int ya = 0, yt = 0, pa = 0, pt = 0;
      for (int tries = 0; tries < 100; ++tries) {
        ya = rng.uniform_int(0, 3);
        pa = (ya + rng.uniform_int(1, 3)) % 4;
        yt = (ya + rng.uniform_int(1, 3)) % 4;
        pt = (pa + rng.uniform_int(1, 3)) % 4;
        const RoutePath ry(d.map, cross_route(ya, yt));
        const RoutePath rp(d.map, cross_route(pa, pt));
        if (std::isfinite(first_crossing(ry.line, rp.line).s_a) || yt == pt) break;
      }
      const RoutePath ry(d.map, cross_route(ya, yt));
      const RoutePath rp(d.map, cross_route(pa, pt));
      Crossing c = first_crossing(ry.line, rp.line);
      if (!std::isfinite(c.s_a)) c = {ry.lane_start[2], rp.lane_start[2]};
      const double v_p = rng.uniform(8.0, 11.0);
      const double t_arr = rng.uniform(4.5, 6.0);
      const double s_p = std::max(0.0, c.s_b - v_p * (t_arr + 1.0));
      const double v_y = rng.uniform(6.0, 9.0);
      const AgentDims dims_y = random_dims(rng);
      const double stop = ry.lane_start[1] - 0.5;
      const double s_y = std::max(0.0, stop - 0.5 * dims_y.length - rng.uniform(3.0, 10.0) - v_y);
      AgentSpec yielder = make_spec(cross_route(ya, yt), s_y, v_y, rng.uniform(9.0, 12.0), dims_y);
      yielder.yield_to = kind == ScriptKind::Yield ? 1 : 0;
      AgentSpec passer = make_spec(cross_route(pa, pt), s_p, v_p, v_p + rng.uniform(0.0, 1.0), random_dims(rng));
      if (kind == ScriptKind::Yield) {
        d.specs = {yielder, passer};
        add_background(d.specs, {0}, std::min(n_bg, 1), rng);
      } else {
        d.specs = {passer, yielder};
        add_background(d.specs, {1}, std::min(n_bg, 1), rng);
      }
      break;
    }
    case ScriptKind::Merge: {
      d.params.length = 240.0;
      d.params.merge_x = 120.0;
      d.params.ramp_length = 70.0;
      d.map = build_map(Layout::MergeRamp, d.params);
      const RoutePath ramp(d.map, {2, 1});
      const double s_r = rng.uniform(20.0, 45.0);
      const double v_r = rng.uniform(9.0, 12.0);
      const double t_join = (ramp.lane_start[1] - s_r) / v_r;
      const double v_m = rng.uniform(10.0, 14.0);
      const double offset = (rng.bernoulli(0.5) ? 1.0 : -1.0) * rng.uniform(2.0, 3.5);
      const double s_m = d.params.merge_x - v_m * std::max(0.5, t_join + offset);
      AgentSpec ramp_agent = make_spec({2, 1}, s_r, v_r, rng.uniform(12.0, 15.0), random_dims(rng));
      AgentSpec main_agent = make_spec({0, 1}, std::max(0.0, s_m), v_m, v_m, random_dims(rng));
      d.specs = {ramp_agent, main_agent};
      break;
    }
    case ScriptKind::HeadOn: {
      d.params.length = 300.0;
      d.map = build_map(Layout::TwoLane, d.params);
      const double x_i = rng.uniform(30.0, 70.0);
      const double sep = rng.uniform(40.0, 100.0);
      const double v_i = rng.uniform(8.0, 14.0);
      const double v_j = rng.uniform(8.0, 14.0);
      // Positions refer to t = 0; spawn one second earlier.
      AgentSpec east = make_spec({0}, x_i - v_i, v_i, v_i, random_dims(rng));
      AgentSpec west = make_spec({1}, d.params.length - (x_i + sep) - v_j, v_j, v_j, random_dims(rng));
      d.specs = {east, west};
      add_background(d.specs, {0, 1}, n_bg, rng);
      break;
    }
  }
  return d;
}

}  // namespace detail

/// Checks the generated ground truth is collision-free and stays on the road.
inline bool scenario_is_clean(const Scenario& sc, double edge_margin) {
  const std::vector<DiskSet> disks = disk_sets(sc.agent_dims);
  if (no_collision_loss(sc.history, disks) > 0.0 || no_collision_loss(sc.future, disks) > 0.0) {
    return false;
  }
  const int n = sc.agent_count();
  for (const Trajectory* tr : {&sc.history, &sc.future}) {
    for (int t = 0; t <= tr->horizon(); ++t) {
      for (int i = 0; i < n; ++i) {
        const AgentState& s = tr->state(i, t);
        if (!s.finite()) return false;
        if (signed_edge_distance(sc.map, s.position()) < edge_margin) return false;
        double lane_d = kInf;
        for (const Lane& lane : sc.map.lanes) {
          lane_d = std::min(lane_d, project(lane.centerline, s.position()).distance - 0.5 * lane.width);
        }
        if (lane_d > 1.0) return false;
        for (int j = i + 1; j < n; ++j) {
          if (boxes_overlap(OrientedBox::of(s, sc.agent_dims[i]),
                            OrientedBox::of(tr->state(j, t), sc.agent_dims[j]))) {
            return false;
          }
        }
      }
    }
  }
  return true;
}

/// Attaches heuristic tags, interest-pair interactions and per-agent prompts.
inline void annotate_scenario(Scenario& sc, const Vocabulary& vocab,
                              const LabelThresholds& th = {}) {
  const int n = sc.agent_count();
  sc.labels.tags.assign(static_cast<size_t>(n), {});
  for (int i = 0; i < n; ++i) sc.labels.tags[i] = heuristic_label(sc.future, i, sc.map, th);
  sc.labels.interactions.clear();
  if (n >= 2) {
    const auto [a, b] = sc.interest_pair;
    if (auto l = interaction_label(sc, a, b, th)) sc.labels.interactions.push_back(*l);
    if (auto l = interaction_label(sc, b, a, th)) sc.labels.interactions.push_back(*l);
  }
  sc.prompts.assign(static_cast<size_t>(n), PromptText{});
  for (int i = 0; i < n; ++i) {
    sc.prompts[i].target_agent = i;
    if (n >= 2 && (i == sc.interest_pair.first || i == sc.interest_pair.second)) {
      sc.prompts[i] = compose_prompt(sc.labels, i, vocab);
    }
  }
}

/// Deterministic scripted scenario for (kind, seed).
inline Scenario generate_scenario(ScriptKind kind, std::uint64_t seed, const Vocabulary& vocab,
                                  const GeneratorParams& gp = {}) {
  for (int attempt = 0; attempt < gp.max_attempts; ++attempt) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(attempt)));
    detail::Draft d = detail::draft_scenario(kind, rng, gp.max_background);
    Scenario sc;
    try {
      sc = simulate_scenario(d.map, d.specs, d.script, seed, gp.sim);
    } catch (const InvalidInput&) {
      continue;
    }
    if (!scenario_is_clean(sc, gp.edge_margin)) continue;
    sc.map_params = d.params;
    annotate_scenario(sc, vocab, gp.thresholds);
    return sc;
  }
  throw RuntimeFailure("generate_scenario: no valid " + to_string(kind) +
                       " scenario found for seed " + std::to_string(seed));
}

/// Script assignment for a dataset of `count` scenarios: largest-remainder
/// allocation of the mix weights, then a seeded shuffle.
inline std::vector<ScriptKind> allocate_scripts(const std::map<ScriptKind, double>& mix, int count,
                                                std::uint64_t seed) {
  require(count >= 0, "allocate_scripts: negative count");
  double total = 0.0;
  for (const auto& [k, w] : mix) {
    require(w >= 0.0 && std::isfinite(w), "allocate_scripts: weights must be non-negative");
    total += w;
  }
  require(total > 0.0, "allocate_scripts: weights sum to zero");
  std::vector<std::pair<ScriptKind, double>> items(mix.begin(), mix.end());
  std::vector<int> counts(items.size());
  std::vector<std::pair<double, size_t>> remainders;
  int assigned = 0;
  for (size_t i = 0; i < items.size(); ++i) {
    const double exact = items[i].second / total * count;
    counts[i] = static_cast<int>(std::floor(exact));
    assigned += counts[i];
    remainders.push_back({exact - counts[i], i});
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (int r = 0; assigned < count; ++r, ++assigned) ++counts[remainders[r % remainders.size()].second];
  std::vector<ScriptKind> out;
  for (size_t i = 0; i < items.size(); ++i) out.insert(out.end(), counts[i], items[i].first);
  Rng rng(derive_seed(seed, 0xA11CA7Eu));
  for (size_t i = out.size(); i > 1; --i) {
    const size_t j = static_cast<size_t>(rng.uniform_int(0, static_cast<int>(i) - 1));
    std::swap(out[i - 1], out[j]);
  }
  return out;
}

inline std::map<ScriptKind, double> uniform_mix() {
  std::map<ScriptKind, double> m;
  for (ScriptKind k : kAllScripts) m[k] = 1.0;
  return m;
}

}  // namespace langsim
