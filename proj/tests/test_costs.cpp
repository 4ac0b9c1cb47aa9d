// Copyright 2026 The LangSim Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "langsim/core/rng.hpp"
#include "langsim/costs/collision.hpp"

namespace langsim {
namespace {

Trajectory random_traj(int n, int T, std::uint64_t seed, double spread) {
  Rng rng(seed);
  Trajectory t(n, T, kDefaultDt);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k <= T; ++k) {
      t.state(i, k) = {rng.uniform(-spread, spread), rng.uniform(-spread, spread), rng.uniform(-kPi, kPi),
                       rng.uniform(0, 10)};
    }
  }
  return t;
}

Trajectory static_pair(Vec2 a, Vec2 b, int T) {
  Trajectory t(2, T, kDefaultDt);
  for (int k = 0; k <= T; ++k) {
    t.state(0, k) = {a.x(), a.y(), 0.0, 0.0};
    t.state(1, k) = {b.x(), b.y(), 0.0, 0.0};
  }
  return t;
}

TEST(Disks, Decomposition) {
  const DiskSet a = disk_decomposition(5.0, 2.0, 3);
  ASSERT_EQ(a.offsets.size(), 3u);
  EXPECT_DOUBLE_EQ(a.offsets[0], -1.5);
  EXPECT_DOUBLE_EQ(a.offsets[1], 0.0);
  EXPECT_DOUBLE_EQ(a.offsets[2], 1.5);
  EXPECT_DOUBLE_EQ(a.radius, 1.0);
  const DiskSet b = disk_decomposition(2.0, 2.0, 1);
  ASSERT_EQ(b.offsets.size(), 1u);
  EXPECT_DOUBLE_EQ(b.offsets[0], 0.0);
  const DiskSet c = disk_decomposition(4.0, 2.0, 2);
  ASSERT_EQ(c.offsets.size(), 2u);
  EXPECT_DOUBLE_EQ(c.offsets[0], -1.0);
  EXPECT_DOUBLE_EQ(c.offsets[1], 1.0);
  EXPECT_EQ(disk_decomposition(1.5, 2.0, 3).offsets.size(), 1u);
  EXPECT_THROW(disk_decomposition(0.0, 2.0), InvalidInput);
}

TEST(CollisionCost, StaticPairValue) {
  EXPECT_DOUBLE_EQ(collision_cost(static_pair({5, 0}, {0, 0}, 3), 0, 1), -15.0);
  EXPECT_DOUBLE_EQ(collision_cost(static_pair({2, 2}, {2, 2}, 4), 0, 1), 0.0);
  EXPECT_THROW(collision_cost(static_pair({0, 0}, {1, 0}, 3), 0, 0), InvalidInput);
  EXPECT_THROW(collision_cost(static_pair({0, 0}, {1, 0}, 3), 0, 2), InvalidInput);
}

TEST(CollisionCost, MatchesResummation) {
  const Trajectory t = random_traj(3, 16, 1, 30.0);
  double oracle = 0.0;
  for (int k = 1; k <= 16; ++k) {
    const double dx = t.state(2, k).x - t.state(0, k).x;
    const double dy = t.state(2, k).y - t.state(0, k).y;
    oracle += -std::sqrt(dx * dx + dy * dy);
  }
  EXPECT_NEAR(collision_cost(t, 2, 0), oracle, 1e-12);
}

TEST(CollisionCost, GradientUnitDirection) {
  const auto g = collision_cost_grad(static_pair({5, 0}, {0, 0}, 3), 0, 1);
  ASSERT_EQ(g.size(), 4u);
  EXPECT_EQ(g[0], Vec2(0, 0));
  for (int k = 1; k <= 3; ++k) {
    EXPECT_DOUBLE_EQ(g[k].x(), -1.0);
    EXPECT_DOUBLE_EQ(g[k].y(), 0.0);
  }
  for (const Vec2& v : collision_cost_grad(static_pair({1, 1}, {1, 1}, 2), 0, 1)) EXPECT_EQ(v, Vec2(0, 0));
}

TEST(CollisionCost, GradientMatchesFiniteDifferences) {
  const Trajectory t = random_traj(2, 10, 2, 20.0);
  const auto g = collision_cost_grad(t, 0, 1);
  const double h = 1e-6;
  for (int k = 1; k <= 10; ++k) {
    for (int c = 0; c < 2; ++c) {
      Trajectory p = t, m = t;
      (c == 0 ? p.state(0, k).x : p.state(0, k).y) += h;
      (c == 0 ? m.state(0, k).x : m.state(0, k).y) -= h;
      const double fd = (collision_cost(p, 0, 1) - collision_cost(m, 0, 1)) / (2 * h);
      const double an = c == 0 ? g[k].x() : g[k].y();
      EXPECT_NEAR(an, fd, 1e-6 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST(Overlap, LinearProfile) {
  const DiskSet d = disk_decomposition(2.0, 2.0, 1);
  const AgentState o{0, 0, 0, 0};
  EXPECT_DOUBLE_EQ(pairwise_overlap(o, d, {2, 0, 0, 0}, d), 0.0);
  EXPECT_DOUBLE_EQ(pairwise_overlap(o, d, {0, 0, 0, 0}, d), 1.0);
  EXPECT_DOUBLE_EQ(pairwise_overlap(o, d, {1, 0, 0, 0}, d), 0.5);
  EXPECT_DOUBLE_EQ(pairwise_overlap(o, d, {3, 0, 0, 0}, d), 0.0);
  double prev = 1.0;
  for (double x = 0.0; x < 3.0; x += 0.1) {
    const double v = pairwise_overlap(o, d, {x, 0, 0, 0}, d);
    EXPECT_LE(v, prev);
    EXPECT_GE(v, 0.0);
    prev = v;
  }
}

TEST(NoCollisionLoss, ClearAndOverlappingScenes) {
  const std::vector<DiskSet> disks(2, disk_decomposition(4.5, 2.0));
  EXPECT_EQ(no_collision_loss(static_pair({0, 0}, {30, 0}, 4), disks), 0.0);
  EXPECT_DOUBLE_EQ(no_collision_loss(static_pair({0, 0}, {0, 0}, 4), disks), 0.5);
  EXPECT_DOUBLE_EQ(no_collision_loss(static_pair({0, 0}, {0, 0}, 4), disks, PairAggregation::Max), 2.5);
  EXPECT_DOUBLE_EQ(no_collision_loss(static_pair({0, 0}, {30, 0}, 4), disks, PairAggregation::Max), 0.5);
  Trajectory one(1, 3, kDefaultDt);
  EXPECT_EQ(no_collision_loss(one, {disks[0]}), 0.0);
}

double brute_force(const Trajectory& t, const std::vector<DiskSet>& disks) {
  const int n = t.agent_count();
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      double s = 0.0;
      for (int k = 0; k <= t.horizon(); ++k) {
        double best = 1e300;
        for (double oa : disks[i].offsets) {
          for (double ob : disks[j].offsets) {
            const AgentState& a = t.state(i, k);
            const AgentState& b = t.state(j, k);
            const double dx = (a.x + oa * std::cos(a.heading)) - (b.x + ob * std::cos(b.heading));
            const double dy = (a.y + oa * std::sin(a.heading)) - (b.y + ob * std::sin(b.heading));
            best = std::min(best, std::sqrt(dx * dx + dy * dy));
          }
        }
        const double r = disks[i].radius + disks[j].radius;
        s += best <= r ? 1.0 - best / r : 0.0;
      }
      total += std::min(1.0, s);
    }
  }
  return total / (n * n);
}

TEST(NoCollisionLoss, MatchesBruteForce) {
  std::vector<AgentDims> dims = {{4.5, 2.0}, {5.0, 2.2}, {3.8, 1.8}, {12.0, 2.6}};
  const auto disks = disk_sets(dims);
  for (int s = 0; s < 10; ++s) {
    const Trajectory t = random_traj(4, 6, 100 + s, 8.0);
    EXPECT_NEAR(no_collision_loss(t, disks), brute_force(t, disks), 1e-12);
  }
}

TEST(NoCollisionLoss, TranslationInvariant) {
  const auto disks = disk_sets({{4.5, 2.0}, {4.5, 2.0}, {4.5, 2.0}});
  const Trajectory t = random_traj(3, 5, 7, 6.0);
  Trajectory moved = t;
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k <= 5; ++k) {
      moved.state(i, k).x += 1024.0;
      moved.state(i, k).y -= 512.0;
    }
  }
  EXPECT_NEAR(no_collision_loss(t, disks), no_collision_loss(moved, disks), 1e-12);
}

TEST(NoCollisionLoss, GradientMatchesFiniteDifferences) {
  const auto disks = disk_sets({{4.5, 2.0}, {4.5, 2.0}});
  Trajectory t(2, 2, kDefaultDt);
  t.state(0, 1) = {0.0, 0.0, 0.2, 5.0};
  t.state(1, 1) = {2.1, 1.3, -0.4, 5.0};
  t.state(0, 0) = {-10.0, 0.0, 0.0, 5.0};
  t.state(1, 0) = {10.0, 0.0, 0.0, 5.0};
  t.state(0, 2) = {30.0, 0.0, 0.0, 5.0};
  t.state(1, 2) = {-30.0, 0.0, 0.0, 5.0};
  ASSERT_GT(no_collision_loss(t, disks), 0.0);
  const auto g = no_collision_loss_grad(t, disks);
  const double h = 1e-7;
  for (int i = 0; i < 2; ++i) {
    double* fields[3] = {&t.state(i, 1).x, &t.state(i, 1).y, &t.state(i, 1).heading};
    const double an[3] = {g[i][1].x, g[i][1].y, g[i][1].heading};
    for (int c = 0; c < 3; ++c) {
      const double keep = *fields[c];
      *fields[c] = keep + h;
      const double lp = no_collision_loss(t, disks);
      *fields[c] = keep - h;
      const double lm = no_collision_loss(t, disks);
      *fields[c] = keep;
      EXPECT_NEAR(an[c], (lp - lm) / (2 * h), 1e-6) << i << "," << c;
    }
  }
}

}  // namespace
}  // namespace langsim
