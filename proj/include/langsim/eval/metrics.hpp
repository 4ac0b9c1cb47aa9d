// Copyright 2026 The LangSim Authors
// SPDX-License-Identifier: Apache-2.0
//
// Realism statistics, histogram likelihood scores, minADE and collision rate.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "langsim/core/error.hpp"
#include "langsim/core/geometry.hpp"
#include "langsim/core/types.hpp"
#include "langsim/synth/map.hpp"

namespace langsim {

inline constexpr double kDefaultLaplace = 0.1;
inline constexpr double kTtcCap = 10.0;
inline constexpr double kTtcResolution = 0.1;
inline constexpr double kNearestCap = 40.0;

enum class StatGroup { Kinematic, Interactive, Map };

struct StatisticConfig {
  std::string name;
  int bins = 64;
  double lo = 0.0;
  double hi = 1.0;
  bool indicator = false;
  double weight = 1.0 / 9.0;
  StatGroup group = StatGroup::Kinematic;
};

enum Stat : int {
  kLinearSpeed = 0,
  kLinearAccel,
  kAngularSpeed,
  kAngularAccel,
  kNearestDistance,
  kCollision,
  kTimeToCollision,
  kEdgeDistance,
  kOffroad,
  kStatCount
};

inline std::vector<StatisticConfig> default_statistics() {
  const double w = 1.0 / 9.0;
  return {
      {"linear_speed", 64, 0.0, 30.0, false, w, StatGroup::Kinematic},
      {"linear_acceleration", 64, 0.0, 10.0, false, w, StatGroup::Kinematic},
      {"angular_speed", 64, 0.0, kPi, false, w, StatGroup::Kinematic},
      {"angular_acceleration", 64, 0.0, kTwoPi, false, w, StatGroup::Kinematic},
      {"distance_to_nearest_object", 64, -5.0, 40.0, false, w, StatGroup::Interactive},
      {"collision_indication", 2, 0.0, 1.0, true, w, StatGroup::Interactive},
      {"time_to_collision", 32, 0.0, kTtcCap, false, w, StatGroup::Interactive},
      {"distance_to_road_edge", 64, -10.0, 20.0, false, w, StatGroup::Map},
      {"offroad_indication", 2, 0.0, 1.0, true, w, StatGroup::Map},
  };
}

// ---------------------------------------------------------------------------
// Per-agent statistic series. Positions, headings and validity come from the
// trajectory states 0..T.

struct KinematicSeries {
  std::vector<double> speed, accel, angular_speed, angular_accel;
};

/// Finite-difference kinematics for one agent; requires every used state to be valid.
inline KinematicSeries kinematic_stats(const Trajectory& traj, int agent) {
  KinematicSeries k;
  const int T = traj.horizon();
  const double dt = traj.dt();
  for (int t = 0; t <= T; ++t) {
    if (!traj.valid(agent, t)) return k;
  }
  if (T < 1) return k;
  std::vector<Vec2> vel;
  for (int t = 0; t < T; ++t) {
    const Vec2 v = (traj.state(agent, t + 1).position() - traj.state(agent, t).position()) / dt;
    vel.push_back(v);
    k.speed.push_back(v.norm());
    k.angular_speed.push_back(
        std::abs(wrap_angle(traj.state(agent, t + 1).heading - traj.state(agent, t).heading)) / dt);
  }
  for (int t = 0; t + 1 < T; ++t) {
    k.accel.push_back(((vel[t + 1] - vel[t]) / dt).norm());
    const double w0 = wrap_angle(traj.state(agent, t + 1).heading - traj.state(agent, t).heading) / dt;
    const double w1 =
        wrap_angle(traj.state(agent, t + 2).heading - traj.state(agent, t + 1).heading) / dt;
    k.angular_accel.push_back(std::abs(w1 - w0) / dt);
  }
  return k;
}

/// First time (grid search, capped) at which two boxes moving at constant velocity overlap.
inline double time_to_collision(const AgentState& a, const AgentDims& da, const AgentState& b,
                                const AgentDims& db, double cap = kTtcCap,
                                double resolution = kTtcResolution) {
  const Vec2 va(a.speed * std::cos(a.heading), a.speed * std::sin(a.heading));
  const Vec2 vb(b.speed * std::cos(b.heading), b.speed * std::sin(b.heading));
  const int steps = static_cast<int>(std::llround(cap / resolution));
  for (int s = 0; s <= steps; ++s) {
    const double tau = s * resolution;
    OrientedBox ba = OrientedBox::of(a, da);
    OrientedBox bb = OrientedBox::of(b, db);
    ba.center += tau * va;
    bb.center += tau * vb;
    if (boxes_overlap(ba, bb)) return tau;
  }
  return cap;
}

struct InteractionSeries {
  std::vector<double> nearest;  // per valid step t = 1..T
  std::vector<double> ttc;
  bool collided = false;
  bool any_valid = false;
};

/// Interaction statistics for `agent` over steps 1..T.
inline InteractionSeries interaction_stats(const Trajectory& traj, int agent,
                                           const std::vector<AgentDims>& dims) {
  require_shape(static_cast<int>(dims.size()) == traj.agent_count(), "interaction_stats: dims");
  InteractionSeries s;
  for (int t = 1; t <= traj.horizon(); ++t) {
    if (!traj.valid(agent, t)) continue;
    s.any_valid = true;
    const AgentState& me = traj.state(agent, t);
    const OrientedBox mb = OrientedBox::of(me, dims[agent]);
    double nearest = kNearestCap;
    double ttc = kTtcCap;
    for (int j = 0; j < traj.agent_count(); ++j) {
      if (j == agent || !traj.valid(j, t)) continue;
      const double d = box_signed_distance(mb, OrientedBox::of(traj.state(j, t), dims[j]));
      nearest = std::min(nearest, d);
      if (d < 0.0) s.collided = true;
      ttc = std::min(ttc, time_to_collision(me, dims[agent], traj.state(j, t), dims[j]));
    }
    s.nearest.push_back(nearest);
    s.ttc.push_back(ttc);
  }
  return s;
}

struct MapSeries {
  std::vector<double> edge_distance;  // per valid step t = 1..T
  bool departed = false;
};

inline MapSeries map_stats(const Trajectory& traj, int agent, const MapGraph& map) {
  require(!map.edges.empty(), "map_stats: map has no road edges");
  MapSeries m;
  for (int t = 1; t <= traj.horizon(); ++t) {
    if (!traj.valid(agent, t)) continue;
    const double d = signed_edge_distance(map, traj.state(agent, t).position());
    m.edge_distance.push_back(d);
    if (d < 0.0) m.departed = true;
  }
  return m;
}

/// All nine statistics for one agent; indicators are single-element series.
using AgentStatistics = std::array<std::vector<double>, kStatCount>;

inline AgentStatistics agent_statistics(const Trajectory& traj, int agent,
                                        const std::vector<AgentDims>& dims, const MapGraph& map) {
  AgentStatistics s;
  KinematicSeries k = kinematic_stats(traj, agent);
  s[kLinearSpeed] = std::move(k.speed);
  s[kLinearAccel] = std::move(k.accel);
  s[kAngularSpeed] = std::move(k.angular_speed);
  s[kAngularAccel] = std::move(k.angular_accel);
  InteractionSeries in = interaction_stats(traj, agent, dims);
  s[kNearestDistance] = std::move(in.nearest);
  s[kTimeToCollision] = std::move(in.ttc);
  if (in.any_valid) s[kCollision] = {in.collided ? 1.0 : 0.0};
  MapSeries m = map_stats(traj, agent, map);
  if (!m.edge_distance.empty()) s[kOffroad] = {m.departed ? 1.0 : 0.0};
  s[kEdgeDistance] = std::move(m.edge_distance);
  return s;
}

// ---------------------------------------------------------------------------
// Likelihood scoring.

inline int histogram_bin(double v, const StatisticConfig& c) {
  const double x = std::clamp(v, c.lo, c.hi);
  const int b = static_cast<int>(std::floor((x - c.lo) / (c.hi - c.lo) * c.bins));
  return std::clamp(b, 0, c.bins - 1);
}

/// -log p(gt) under the Laplace-smoothed histogram of `samples`.
inline double histogram_nll(std::span<const double> samples, double gt, const StatisticConfig& c,
                            double lambda = kDefaultLaplace) {
  require(!samples.empty(), "histogram_nll: no samples");
  require(lambda > 0.0, "histogram_nll: smoothing must be positive");
  require(c.hi > c.lo, "histogram_nll: empty value range");
  const double m = static_cast<double>(samples.size());
  if (c.indicator) {
    const bool g = gt >= 0.5;
    double count = 0.0;
    for (double s : samples) count += (s >= 0.5) == g ? 1.0 : 0.0;
    return -std::log((count + lambda) / (m + 2.0 * lambda));
  }
  require(c.bins >= 2, "histogram_nll: need at least two bins");
  const int gb = histogram_bin(gt, c);
  double count = 0.0;
  for (double s : samples) count += histogram_bin(s, c) == gb ? 1.0 : 0.0;
  return -std::log((count + lambda) / (m + lambda * c.bins));
}

/// exp(-mean NLL over valid steps); returns a negative value when nothing is valid.
inline double aggregate_agent(std::span<const double> nll, std::span<const char> valid) {
  require_shape(nll.size() == valid.size(), "aggregate_agent: validity mask size");
  double sum = 0.0;
  int n = 0;
  for (size_t t = 0; t < nll.size(); ++t) {
    if (!valid[t]) continue;
    sum += nll[t];
    ++n;
  }
  return n == 0 ? -1.0 : std::exp(-sum / n);
}

struct MetricReport {
  std::vector<std::string> names;
  std::vector<double> stat_scores;  // m(j), averaged over scored scenarios
  std::vector<int> stat_counts;     // scenarios contributing to each statistic
  double kinematic = 0.0;
  double interactive = 0.0;
  double map = 0.0;
  double composite = 0.0;
  double min_ade = 0.0;
  double collision_rate = 0.0;
  int scenario_count = 0;
  int sample_count = 0;
};

/// Per-scenario per-statistic scores m(i, j); negative entries mark "no valid target".
struct ScenarioScores {
  std::array<double, kStatCount> m{};
};

/// Scores the ground-truth future of the target agents under the rollout histograms.
/// Each agent's histogram pools the sampled values over all valid steps.
inline ScenarioScores score_scenario(const Trajectory& gt, const std::vector<Trajectory>& rollouts,
                                     const std::vector<AgentDims>& dims, const MapGraph& map,
                                     const std::vector<int>& targets,
                                     const std::vector<StatisticConfig>& stats,
                                     double lambda = kDefaultLaplace) {
  require(!rollouts.empty(), "score_scenario: no rollouts");
  require_shape(static_cast<int>(stats.size()) == kStatCount, "score_scenario: statistic count");
  for (const Trajectory& r : rollouts) {
    require_shape(r.agent_count() == gt.agent_count() && r.horizon() == gt.horizon(),
                  "score_scenario: rollout shape differs from ground truth");
  }
  ScenarioScores sc;
  std::array<double, kStatCount> sum{};
  std::array<int, kStatCount> cnt{};
  for (int a : targets) {
    require(a >= 0 && a < gt.agent_count(), "score_scenario: target out of range");
    const AgentStatistics g = agent_statistics(gt, a, dims, map);
    std::vector<AgentStatistics> samp;
    samp.reserve(rollouts.size());
    for (const Trajectory& r : rollouts) samp.push_back(agent_statistics(r, a, dims, map));
    for (int j = 0; j < kStatCount; ++j) {
      std::vector<double> pool;
      for (const AgentStatistics& s : samp) pool.insert(pool.end(), s[j].begin(), s[j].end());
      if (g[j].empty() || pool.empty()) continue;
      std::vector<double> nll;
      for (double v : g[j]) nll.push_back(histogram_nll(pool, v, stats[j], lambda));
      const std::vector<char> valid(nll.size(), 1);
      const double m = aggregate_agent(nll, valid);
      if (m < 0.0) continue;
      sum[j] += m;
      ++cnt[j];
    }
  }
  for (int j = 0; j < kStatCount; ++j) sc.m[j] = cnt[j] > 0 ? sum[j] / cnt[j] : -1.0;
  return sc;
}

/// Averages per-scenario scores into a report (composite = sum_j w_j mean_i m(i,j)).
inline MetricReport aggregate(const std::vector<ScenarioScores>& scores,
                              const std::vector<StatisticConfig>& stats) {
  require_shape(static_cast<int>(stats.size()) == kStatCount, "aggregate: statistic count");
  double wsum = 0.0;
  for (const auto& s : stats) wsum += s.weight;
  require(std::abs(wsum - 1.0) < 1e-9, "aggregate: weights must sum to one");
  MetricReport r;
  r.scenario_count = static_cast<int>(scores.size());
  std::array<double, 3> gsum{};
  std::array<int, 3> gcnt{};
  for (int j = 0; j < kStatCount; ++j) {
    double s = 0.0;
    int n = 0;
    for (const ScenarioScores& sc : scores) {
      if (sc.m[j] < 0.0) continue;
      s += sc.m[j];
      ++n;
    }
    const double mean = n > 0 ? s / n : 0.0;
    r.names.push_back(stats[j].name);
    r.stat_scores.push_back(mean);
    r.stat_counts.push_back(n);
    r.composite += stats[j].weight * mean;
    gsum[static_cast<int>(stats[j].group)] += mean;
    ++gcnt[static_cast<int>(stats[j].group)];
  }
  r.kinematic = gcnt[0] ? gsum[0] / gcnt[0] : 0.0;
  r.interactive = gcnt[1] ? gsum[1] / gcnt[1] : 0.0;
  r.map = gcnt[2] ? gsum[2] / gcnt[2] : 0.0;
  return r;
}

// ---------------------------------------------------------------------------
// Displacement and collision measures.

/// Mean L2 position error over valid agents and steps 1..T; negative if nothing is valid.
inline double ade(const Trajectory& pred, const Trajectory& gt) {
  require_shape(pred.agent_count() == gt.agent_count() && pred.horizon() == gt.horizon(),
                "ade: shape mismatch");
  double s = 0.0;
  int n = 0;
  for (int i = 0; i < gt.agent_count(); ++i) {
    for (int t = 1; t <= gt.horizon(); ++t) {
      if (!gt.valid(i, t) || !pred.valid(i, t)) continue;
      s += (pred.state(i, t).position() - gt.state(i, t).position()).norm();
      ++n;
    }
  }
  return n == 0 ? -1.0 : s / n;
}

/// Joint minADE; `best` receives the minimising index (ties: lowest).
inline double min_ade(const std::vector<Trajectory>& samples, const Trajectory& gt,
                      int* best = nullptr) {
  require(!samples.empty(), "min_ade: no samples");
  double m = kInf;
  int idx = -1;
  for (int k = 0; k < static_cast<int>(samples.size()); ++k) {
    const double a = ade(samples[k], gt);
    if (a < 0.0) continue;
    if (a < m) {
      m = a;
      idx = k;
    }
  }
  if (idx < 0) throw InvalidInput("min_ade: no valid steps");
  if (best != nullptr) *best = idx;
  return m;
}

/// True when the pair's rectangles overlap at any valid step.
inline bool pair_collided(const Trajectory& traj, const std::vector<AgentDims>& dims, int a, int b) {
  for (int t = 0; t <= traj.horizon(); ++t) {
    if (!traj.valid(a, t) || !traj.valid(b, t)) continue;
    if (boxes_overlap(OrientedBox::of(traj.state(a, t), dims[a]),
                      OrientedBox::of(traj.state(b, t), dims[b]))) {
      return true;
    }
  }
  return false;
}

struct CollisionCase {
  const Trajectory* traj;
  const std::vector<AgentDims>* dims;
  std::pair<int, int> pair;
};

inline double collision_rate(const std::vector<CollisionCase>& batch) {
  require(!batch.empty(), "collision_rate: empty batch");
  int hits = 0;
  for (const CollisionCase& c : batch) {
    if (pair_collided(*c.traj, *c.dims, c.pair.first, c.pair.second)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(batch.size());
}

}  // namespace langsim
