// Copyright 2026 The LangSim Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "langsim/io/scenario_io.hpp"
#include "langsim/synth/generator.hpp"
#include "langsim/synth/idm.hpp"
#include "langsim/synth/labels.hpp"
#include "langsim/synth/map.hpp"

namespace langsim {
namespace {

const Vocabulary& vocab() {
  static const Vocabulary v = Vocabulary::standard();
  return v;
}

TEST(Map, StraightTwoLanes) {
  MapParams p;
  p.length = 200;
  p.lanes = 2;
  p.lane_width = 3.5;
  const MapGraph m = build_map(Layout::Straight, p);
  ASSERT_EQ(m.lanes.size(), 2u);
  EXPECT_EQ(m.edges.size(), 2u);
  const Vec2 a = m.lanes[0].centerline.front();
  const Vec2 b = m.lanes[1].centerline.front();
  EXPECT_NEAR((a - b).norm(), 3.5, 1e-9);
}

TEST(Map, CrossIntersectionHasEightEdges) {
  MapParams p;
  p.arm = 80;
  const MapGraph m = build_map(Layout::CrossIntersection, p);
  EXPECT_EQ(m.edges.size(), 8u);
  EXPECT_TRUE(m.intersection.has_value());
}

TEST(Map, RampJoinsMainLane) {
  const MapGraph m = build_map(Layout::MergeRamp);
  bool found = false;
  for (const Lane& l : m.lanes) {
    if (l.role != LaneRole::Ramp) continue;
    found = true;
    ASSERT_FALSE(l.successors.empty());
    EXPECT_NE(m.lane(l.successors.front()).role, LaneRole::Ramp);
  }
  EXPECT_TRUE(found);
}

TEST(Map, CenterlineDistanceToEdge) {
  MapParams p;
  p.lanes = 1;
  const MapGraph m = build_map(Layout::Straight, p);
  const Vec2 c = m.lanes[0].centerline[m.lanes[0].centerline.size() / 2];
  EXPECT_NEAR(signed_edge_distance(m, c), 1.75, 1e-6);
  EXPECT_NEAR(signed_edge_distance(m, c + Vec2(0, -3.75)), -2.0, 1e-6);
}

TEST(Idm, FreeRoadEquilibrium) {
  IdmParams p;
  EXPECT_NEAR(idm_accel(1e6, p.v0, p.v0, p), 0.0, 1e-3);
}

TEST(Idm, StandingStartGivesMaxAcceleration) {
  IdmParams p;
  EXPECT_NEAR(idm_accel(1e9, 0.0, 0.0, p), p.a, 1e-9);
}

TEST(Idm, HandEvaluatedFormula) {
  IdmParams p;
  p.v0 = 15;
  p.headway = 1.5;
  p.a = 1.5;
  p.b = 2;
  p.s0 = 2;
  p.delta = 4;
  // s* = 2 + 10*1.5 = 17; a = 1.5 * (1 - (10/15)^4 - (17/30)^2)
  const double expected = 1.5 * (1.0 - std::pow(10.0 / 15.0, 4) - std::pow(17.0 / 30.0, 2));
  EXPECT_NEAR(idm_accel(30, 10, 10, p), expected, 1e-12);
  EXPECT_NEAR(idm_accel(30, 10, 10, p), 0.7220370370, 1e-9);
}

TEST(Idm, NonPositiveGapBrakes) {
  EXPECT_DOUBLE_EQ(idm_accel(0.0, 5, 5, IdmParams{}), -ActionBounds{}.max_accel);
}

TEST(Generator, DeterministicForSeed) {
  for (ScriptKind k : kAllScripts) {
    const Scenario a = generate_scenario(k, 17, vocab());
    const Scenario b = generate_scenario(k, 17, vocab());
    EXPECT_EQ(scenario_to_line(a), scenario_to_line(b));
  }
}

TEST(Generator, FollowerKeepsJamDistance) {
  for (int s = 0; s < 10; ++s) {
    const Scenario sc = generate_scenario(ScriptKind::Follow, derive_seed(31, s), vocab());
    const int a = sc.interest_pair.first;
    const int b = sc.interest_pair.second;
    for (int t = 0; t <= sc.future.horizon(); ++t) {
      const double gap = box_signed_distance(OrientedBox::of(sc.future.state(a, t), sc.agent_dims[a]),
                                             OrientedBox::of(sc.future.state(b, t), sc.agent_dims[b]));
      EXPECT_GE(gap, IdmParams{}.s0 - 1e-6);
    }
  }
}

TEST(Generator, YielderHoldsWhileOtherCrosses) {
  int checked = 0;
  for (int s = 0; s < 40; ++s) {
    const Scenario sc = generate_scenario(ScriptKind::Yield, derive_seed(37, s), vocab());
    ASSERT_TRUE(sc.map.intersection.has_value());
    const int y = sc.interest_pair.first;
    const int p = sc.interest_pair.second;
    for (int t = 0; t <= sc.future.horizon(); ++t) {
      if (!sc.map.intersection->contains(sc.future.state(p, t).position())) continue;
      EXPECT_LT(sc.future.state(y, t).speed, 0.5) << "seed " << s << " t " << t;
      ++checked;
    }
  }
  EXPECT_GT(checked, 40);
}

TEST(Labels, ConstantSpeedStraight) {
  MapParams mp;
  mp.length = 300;
  const MapGraph m = build_map(Layout::Straight, mp);
  const Vec2 c = m.lanes[0].centerline.front();
  std::vector<AgentState> st{{c.x() + 20, c.y(), 0, 10}};
  for (int t = 0; t < 16; ++t) st.push_back(step_unicycle(st.back(), {0, 0}, 0.5));
  const auto tags = heuristic_label(st, m);
  auto has = [&](TagKind k) {
    for (const auto& t : tags) {
      if (t.kind == k) return true;
    }
    return false;
  };
  EXPECT_TRUE(has(TagKind::ConstantSpeed));
  EXPECT_TRUE(has(TagKind::GoingStraight));
}

TEST(Labels, SpeedingUpNotTurning) {
  MapParams mp;
  mp.length = 300;
  const MapGraph m = build_map(Layout::Straight, mp);
  const Vec2 c = m.lanes[0].centerline.front();
  std::vector<AgentState> st{{c.x() + 20, c.y(), 0, 0}};
  for (int t = 0; t < 16; ++t) st.push_back(step_unicycle(st.back(), {1.0, 0.02 / 8.0}, 0.5));
  const auto tags = heuristic_label(st, m);
  bool up = false, straight = false, left = false;
  for (const auto& t : tags) {
    up |= t.kind == TagKind::SpeedingUp;
    straight |= t.kind == TagKind::GoingStraight;
    left |= t.kind == TagKind::TurningLeft;
  }
  EXPECT_TRUE(up);
  EXPECT_TRUE(straight);
  EXPECT_FALSE(left);
}

TEST(Labels, StaticAgent) {
  const MapGraph m = build_map(Layout::Straight);
  const Vec2 c = m.lanes[0].centerline[10];
  std::vector<AgentState> st(17, AgentState{c.x(), c.y(), 0, 0.05});
  const auto tags = heuristic_label(st, m);
  ASSERT_FALSE(tags.empty());
  bool stat = false;
  for (const auto& t : tags) stat |= t.kind == TagKind::Static;
  EXPECT_TRUE(stat);
}

TEST(Labels, ScriptsProduceExpectedInteraction) {
  for (ScriptKind k : {ScriptKind::Follow, ScriptKind::Yield}) {
    int agree = 0;
    for (int s = 0; s < 10; ++s) {
      const Scenario sc = generate_scenario(k, derive_seed(41, s), vocab());
      const auto l = interaction_label(sc, sc.interest_pair);
      if (l && l->kind == expected_kind(k)) ++agree;
    }
    EXPECT_GE(agree, 9) << to_string(k);
  }
  const Scenario f = generate_scenario(ScriptKind::Follow, derive_seed(41, 0), vocab());
  const auto l = interaction_label(f, f.interest_pair);
  ASSERT_TRUE(l.has_value());
  EXPECT_EQ(subtype_info(l->subtype).description, "Following with a lead vehicle");
  const Scenario y = generate_scenario(ScriptKind::Yield, derive_seed(41, 0), vocab());
  const auto ly = interaction_label(y, y.interest_pair);
  ASSERT_TRUE(ly.has_value());
  EXPECT_EQ(subtype_info(ly->subtype).description, "Intersection yielding");
}

TEST(Labels, FarApartAgentsDoNotInteract) {
  Scenario sc = generate_scenario(ScriptKind::Follow, 5, vocab());
  for (int t = 0; t <= sc.future.horizon(); ++t) {
    sc.future.state(1, t).x += 5000.0;
    sc.future.state(1, t).y += 5000.0;
  }
  EXPECT_FALSE(interaction_label(sc, 0, 1).has_value());
}

TEST(Dataset, ScriptAllocationFollowsMix) {
  std::map<ScriptKind, double> mix{{ScriptKind::Yield, 0.3}, {ScriptKind::Follow, 0.4}, {ScriptKind::Pass, 0.3}};
  const auto kinds = allocate_scripts(mix, 1000, 7);
  int y = 0;
  for (ScriptKind k : kinds) y += k == ScriptKind::Yield;
  EXPECT_EQ(y, 300);
}

}  // namespace
}  // namespace langsim
