// Copyright 2026 The LangSim Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "langsim/core/rng.hpp"
#include "langsim/eval/metrics.hpp"
#include "langsim/synth/map.hpp"

namespace langsim {
namespace {

StatisticConfig continuous64() { return {"x", 64, 0.0, 64.0, false, 1.0, StatGroup::Kinematic}; }

Trajectory straight_line(double v0, double accel, int T = 16, double dt = 0.5) {
  Trajectory tr(1, T, dt);
  for (int t = 0; t <= T; ++t) {
    const double s = t * dt;
    tr.state(0, t) = {v0 * s + 0.5 * accel * s * s, 0.0, 0.0, v0 + accel * s};
  }
  return tr;
}

Trajectory offset(const Trajectory& gt, double dx) {
  Trajectory t = gt;
  for (int i = 0; i < t.agent_count(); ++i) {
    for (int k = 0; k <= t.horizon(); ++k) t.state(i, k).x += dx;
  }
  return t;
}

TEST(Kinematics, ConstantVelocity) {
  const auto k = kinematic_stats(straight_line(10.0, 0.0), 0);
  ASSERT_EQ(k.speed.size(), 16u);
  ASSERT_EQ(k.accel.size(), 15u);
  ASSERT_EQ(k.angular_speed.size(), 16u);
  ASSERT_EQ(k.angular_accel.size(), 15u);
  for (double v : k.speed) EXPECT_NEAR(v, 10.0, 1e-12);
  for (double a : k.accel) EXPECT_NEAR(a, 0.0, 1e-12);
}

TEST(Kinematics, UniformAcceleration) {
  const auto k = kinematic_stats(straight_line(1.0, 2.0), 0);
  for (double a : k.accel) EXPECT_NEAR(a, 2.0, 1e-9);
}

TEST(Kinematics, AngularSpeedWrapsAroundPi) {
  Trajectory tr(1, 1, 0.5);
  tr.state(0, 0) = {0.0, 0.0, 3.0, 0.0};
  tr.state(0, 1) = {0.0, 0.0, -3.0, 0.0};
  const auto k = kinematic_stats(tr, 0);
  ASSERT_EQ(k.angular_speed.size(), 1u);
  EXPECT_NEAR(k.angular_speed[0], std::abs(2.0 * (kPi - 3.0)) / 0.5, 1e-12);
  EXPECT_NEAR(k.angular_speed[0], 0.566, 1e-3);
}

TEST(Kinematics, InvalidStateGivesEmptySeries) {
  Trajectory tr = straight_line(5.0, 0.0, 4);
  tr.set_valid(0, 2, false);
  EXPECT_TRUE(kinematic_stats(tr, 0).speed.empty());
}

TEST(Interaction, LateralSeparationOfEight) {
  Trajectory tr(2, 1, 0.5);
  for (int t = 0; t <= 1; ++t) {
    tr.state(0, t) = {0.0, 0.0, 0.0, 0.0};
    tr.state(1, t) = {0.0, 10.0, 0.0, 0.0};
  }
  const std::vector<AgentDims> dims{{4.0, 2.0}, {4.0, 2.0}};
  const auto s = interaction_stats(tr, 0, dims);
  ASSERT_EQ(s.nearest.size(), 1u);
  EXPECT_NEAR(s.nearest[0], 8.0, 1e-12);
  EXPECT_FALSE(s.collided);
  EXPECT_NEAR(interaction_stats(tr, 1, dims).nearest[0], 8.0, 1e-12);
}

TEST(Interaction, CoincidentBoxesCollide) {
  Trajectory tr(2, 1, 0.5);
  const std::vector<AgentDims> dims{{4.0, 2.0}, {4.0, 2.0}};
  const auto s = interaction_stats(tr, 0, dims);
  EXPECT_LT(s.nearest[0], 0.0);
  EXPECT_TRUE(s.collided);
}

TEST(Interaction, HeadOnTimeToCollision) {
  // Bumper gap 20 m, closing at 10 m/s.
  const AgentDims d{4.0, 2.0};
  const AgentState a{0.0, 0.0, 0.0, 5.0};
  const AgentState b{24.0, 0.0, kPi, 5.0};
  EXPECT_NEAR(time_to_collision(a, d, b, d), 2.0, 0.1 + 1e-9);
  const AgentState far{24.0, 30.0, kPi, 5.0};
  EXPECT_DOUBLE_EQ(time_to_collision(a, d, far, d), kTtcCap);
}

TEST(Interaction, SingleAgentUsesCaps) {
  const auto s = interaction_stats(straight_line(5.0, 0.0, 2), 0, {AgentDims{}});
  for (double v : s.nearest) EXPECT_DOUBLE_EQ(v, kNearestCap);
  for (double v : s.ttc) EXPECT_DOUBLE_EQ(v, kTtcCap);
}

TEST(Interaction, DegenerateDimsThrow) {
  Trajectory tr(2, 1, 0.5);
  tr.state(1, 1).x = 10.0;
  EXPECT_THROW(interaction_stats(tr, 0, {AgentDims{0.0, 2.0}, AgentDims{}}), InvalidInput);
}

TEST(MapStats, CenterlineAndOutside) {
  MapParams p;
  p.lanes = 1;
  p.lane_width = 3.5;
  const MapGraph map = build_map(Layout::Straight, p);
  Trajectory tr(1, 1, 0.5);
  tr.state(0, 1) = {20.0, 1.75, 0.0, 0.0};
  auto m = map_stats(tr, 0, map);
  EXPECT_NEAR(m.edge_distance[0], 1.75, 1e-9);
  EXPECT_FALSE(m.departed);
  tr.state(0, 1) = {20.0, -2.0, 0.0, 0.0};
  m = map_stats(tr, 0, map);
  EXPECT_NEAR(m.edge_distance[0], -2.0, 1e-9);
  EXPECT_TRUE(m.departed);
}

TEST(MapStats, SignFlipsExactlyAtEdge) {
  MapParams p;
  p.lanes = 1;
  const MapGraph map = build_map(Layout::Straight, p);
  for (int s = 0; s <= 400; ++s) {
    const double y = -1.0 + s * 0.005;
    const double d = signed_edge_distance(map, {20.0, y});
    if (y > 1e-9) {
      EXPECT_GT(d, 0.0) << y;
    } else if (y < -1e-9) {
      EXPECT_LT(d, 0.0) << y;
    }
  }
}

TEST(MapStats, MapWithoutEdgesThrows) {
  EXPECT_THROW(map_stats(Trajectory(1, 1, 0.5), 0, MapGraph{}), InvalidInput);
}

TEST(HistogramNll, AllSamplesInGtBin) {
  const std::vector<double> s(32, 10.5);
  EXPECT_NEAR(histogram_nll(s, 10.2, continuous64(), 1e-9), 0.0, 1e-6);
}

TEST(HistogramNll, TenOfThirtyTwo) {
  std::vector<double> s(32, 40.5);
  std::fill(s.begin(), s.begin() + 10, 10.5);
  EXPECT_NEAR(histogram_nll(s, 10.5, continuous64()), -std::log(10.1 / 38.4), 1e-12);
  EXPECT_NEAR(std::exp(-histogram_nll(s, 10.5, continuous64())), 0.26302, 1e-5);
}

TEST(HistogramNll, EmptyBinFloor) {
  const std::vector<double> s(32, 40.5);
  EXPECT_NEAR(histogram_nll(s, 10.5, continuous64()), -std::log(0.1 / 38.4), 1e-12);
}

TEST(HistogramNll, ClipsIntoRange) {
  const std::vector<double> s(4, 63.9);
  EXPECT_NEAR(histogram_nll(s, 1000.0, continuous64(), 1e-9), 0.0, 1e-6);
}

TEST(HistogramNll, IndicatorIsSmoothedBernoulli) {
  const StatisticConfig c{"c", 2, 0.0, 1.0, true, 1.0, StatGroup::Interactive};
  const std::vector<double> s{1.0, 0.0, 0.0, 0.0};
  EXPECT_NEAR(histogram_nll(s, 1.0, c), -std::log(1.1 / 4.2), 1e-12);
}

TEST(HistogramNll, PermutationInvariant) {
  Rng rng(3);
  std::vector<double> s;
  for (int i = 0; i < 50; ++i) s.push_back(rng.uniform(0.0, 64.0));
  const double a = histogram_nll(s, 20.0, continuous64());
  std::reverse(s.begin(), s.end());
  EXPECT_DOUBLE_EQ(histogram_nll(s, 20.0, continuous64()), a);
}

TEST(Aggregate, AgentScoreFromTwoSteps) {
  const std::vector<double> nll{0.0, std::log(4.0)};
  const std::vector<char> valid{1, 1};
  EXPECT_NEAR(aggregate_agent(nll, valid), 0.5, 1e-12);
  const std::vector<char> none{0, 0};
  EXPECT_LT(aggregate_agent(nll, none), 0.0);
}

TEST(Aggregate, WeightedComposite) {
  std::vector<StatisticConfig> stats = default_statistics();
  for (auto& s : stats) s.weight = 0.0;
  stats[0].weight = 0.5;
  stats[1].weight = 0.5;
  ScenarioScores sc;
  sc.m.fill(1.0);
  sc.m[1] = 0.5;
  const MetricReport r = aggregate({sc}, stats);
  EXPECT_NEAR(r.composite, 0.75, 1e-12);
}

TEST(Aggregate, WeightsMustSumToOne) {
  std::vector<StatisticConfig> stats = default_statistics();
  stats[0].weight += 0.1;
  EXPECT_THROW(aggregate({ScenarioScores{}}, stats), InvalidInput);
}

TEST(Aggregate, DefaultWeightsAreUniform) {
  const auto stats = default_statistics();
  ASSERT_EQ(stats.size(), static_cast<size_t>(kStatCount));
  for (const auto& s : stats) EXPECT_NEAR(s.weight, 1.0 / 9.0, 1e-15);
}

TEST(Aggregate, CompositeIsWeightedMeanOfStatScores) {
  Rng rng(5);
  std::vector<ScenarioScores> all(7);
  for (auto& s : all) {
    for (double& m : s.m) m = rng.uniform(0.01, 1.0);
  }
  all[2].m[4] = -1.0;
  const auto stats = default_statistics();
  const MetricReport r = aggregate(all, stats);
  double c = 0.0;
  for (int j = 0; j < kStatCount; ++j) {
    c += stats[j].weight * r.stat_scores[j];
    EXPECT_GT(r.stat_scores[j], 0.0);
    EXPECT_LE(r.stat_scores[j], 1.0);
  }
  EXPECT_NEAR(r.composite, c, 1e-12);
  EXPECT_EQ(r.stat_counts[4], 6);
}

TEST(Score, RolloutsEqualToGtGiveNearOne) {
  MapParams p;
  p.lanes = 2;
  const MapGraph map = build_map(Layout::Straight, p);
  Trajectory gt(2, 16, 0.5);
  for (int t = 0; t <= 16; ++t) {
    gt.state(0, t) = {5.0 + 4.0 * t, 1.75, 0.0, 8.0};
    gt.state(1, t) = {30.0 + 4.0 * t, 5.25, 0.0, 8.0};
  }
  const std::vector<AgentDims> dims(2);
  const std::vector<Trajectory> rollouts(8, gt);
  const ScenarioScores s = score_scenario(gt, rollouts, dims, map, {0, 1}, default_statistics(), 1e-9);
  for (double m : s.m) EXPECT_NEAR(m, 1.0, 1e-6);
}

TEST(Score, HistogramPoolsOverTime) {
  // Nearest distance visits 16 distinct bins; each GT step then holds 1/16 of the pool.
  MapParams p;
  p.lanes = 2;
  const MapGraph map = build_map(Layout::Straight, p);
  Trajectory gt(2, 16, 0.5);
  for (int t = 0; t <= 16; ++t) {
    gt.state(0, t) = {5.0, 1.75, 0.0, 0.0};
    gt.state(1, t) = {12.0 + 2.0 * t, 1.75, 0.0, 0.0};
  }
  const std::vector<AgentDims> dims{{4.0, 2.0}, {4.0, 2.0}};
  const std::vector<Trajectory> rollouts(8, gt);
  const double lambda = 1e-9;
  const ScenarioScores s = score_scenario(gt, rollouts, dims, map, {0}, default_statistics(), lambda);
  EXPECT_NEAR(s.m[kNearestDistance], (8.0 + lambda) / (128.0 + 64.0 * lambda), 1e-9);
  EXPECT_NEAR(s.m[kLinearSpeed], 1.0, 1e-6);
}

TEST(MinAde, ExactSampleGivesZero) {
  const Trajectory gt = straight_line(5.0, 0.0);
  int best = -1;
  EXPECT_DOUBLE_EQ(min_ade({offset(gt, 3.0), gt}, gt, &best), 0.0);
  EXPECT_EQ(best, 1);
}

TEST(MinAde, ConstantOffset) {
  const Trajectory gt = straight_line(5.0, 0.0);
  EXPECT_NEAR(min_ade({offset(gt, 1.0), offset(gt, -1.0)}, gt), 1.0, 1e-12);
}

TEST(MinAde, EqualMeansTieToLowestIndex) {
  const Trajectory gt = straight_line(5.0, 0.0);
  Trajectory a = offset(gt, 2.0);
  Trajectory b = gt;
  for (int t = 1; t <= 16; ++t) b.state(0, t).x += (t % 2 == 1) ? 1.0 : 3.0;
  int best = -1;
  EXPECT_NEAR(min_ade({a, b}, gt, &best), 2.0, 1e-12);
  EXPECT_EQ(best, 0);
}

TEST(MinAde, NoValidStepsThrows) {
  Trajectory gt = straight_line(5.0, 0.0, 2);
  for (int t = 0; t <= 2; ++t) gt.set_valid(0, t, false);
  EXPECT_THROW(min_ade({gt}, gt), InvalidInput);
}

TEST(CollisionRate, Counting) {
  const std::vector<AgentDims> dims(2);
  Trajectory apart(2, 2, 0.5), hit(2, 2, 0.5);
  for (int t = 0; t <= 2; ++t) {
    apart.state(1, t) = {0.0, 20.0, 0.0, 0.0};
    hit.state(1, t) = {0.0, 20.0, 0.0, 0.0};
  }
  hit.state(1, 2) = {1.0, 0.5, 0.3, 0.0};
  std::vector<CollisionCase> batch;
  for (int k = 0; k < 5; ++k) batch.push_back({k < 2 ? &hit : &apart, &dims, {0, 1}});
  EXPECT_NEAR(collision_rate(batch), 0.4, 1e-15);
  std::vector<CollisionCase> clean(3, {&apart, &dims, {0, 1}});
  EXPECT_DOUBLE_EQ(collision_rate(clean), 0.0);
  std::vector<CollisionCase> forced(3, {&hit, &dims, {0, 1}});
  EXPECT_DOUBLE_EQ(collision_rate(forced), 1.0);
  EXPECT_THROW(collision_rate({}), InvalidInput);
}

TEST(CollisionRate, UsesRectanglesNotDisks) {
  // Corners clear by a few centimetres where a circumscribed disk test would overlap.
  const std::vector<AgentDims> dims{{4.0, 2.0}, {4.0, 2.0}};
  Trajectory tr(2, 0, 0.5);
  tr.state(1, 0) = {4.05, 0.0, 0.0, 0.0};
  EXPECT_FALSE(pair_collided(tr, dims, 0, 1));
  tr.state(1, 0) = {3.95, 0.0, 0.0, 0.0};
  EXPECT_TRUE(pair_collided(tr, dims, 0, 1));
}

}  // namespace
}  // namespace langsim
