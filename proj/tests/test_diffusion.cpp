// Copyright 2026 The LangSim Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "langsim/core/dynamics.hpp"
#include "langsim/diffusion/sampler.hpp"
#include "langsim/synth/generator.hpp"

namespace langsim {
namespace {

ad::Mat randn(int rows, int cols, std::uint64_t seed) {
  Rng rng(seed);
  return normal_field(rows, cols, rng);
}

TEST(Schedule, Invariants) {
  for (int K : {1, 4, 5, 100}) {
    const NoiseSchedule s = cosine_schedule(K);
    EXPECT_EQ(s.alpha_bar[0], 1.0);
    double prod = 1.0;
    for (int k = 1; k <= K; ++k) {
      EXPECT_GT(s.beta[k], 0.0);
      EXPECT_LE(s.beta[k], 0.999);
      EXPECT_LT(s.alpha_bar[k], s.alpha_bar[k - 1]);
      prod *= s.alpha[k];
      EXPECT_NEAR(s.alpha_bar[k], prod, 1e-12);
    }
  }
  EXPECT_THROW(cosine_schedule(0), InvalidInput);
}

TEST(Schedule, FourStepValue) {
  EXPECT_NEAR(cosine_schedule(4).alpha_bar[1], 0.8469, 5e-4);
}

TEST(ForwardNoise, ZeroNoiseScalesSignal) {
  const NoiseSchedule s = cosine_schedule(10);
  const ad::Mat x = randn(3, 8, 1);
  const ad::Mat out = forward_noise(x, 4, s, ad::Mat::Zero(3, 8));
  EXPECT_LT((out - std::sqrt(s.alpha_bar[4]) * x).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_THROW(forward_noise(x, 0, s, x), InvalidInput);
  EXPECT_THROW(forward_noise(x, 11, s, x), InvalidInput);
}

TEST(ForwardNoise, LastStepIsAlmostPureNoise) {
  const NoiseSchedule s = cosine_schedule(100);
  const ad::Mat x = randn(4, 32, 2);
  const ad::Mat eps = randn(4, 32, 3);
  const ad::Mat out = forward_noise(x, 100, s, eps);
  EXPECT_LT((out - eps).norm() / eps.norm(), 0.02);
}

TEST(ForwardNoise, MonteCarloVariance) {
  const NoiseSchedule s = cosine_schedule(100);
  const int k = 40;
  const int n = 100000;
  Rng rng(4);
  ad::Mat x0(1, n), eps(1, n);
  for (int i = 0; i < n; ++i) {
    x0(0, i) = 2.0 * rng.normal();
    eps(0, i) = rng.normal();
  }
  const ad::Mat out = forward_noise(x0, k, s, eps);
  const double mean = out.mean();
  const double var = (out.array() - mean).square().sum() / (n - 1);
  const double expected = s.alpha_bar[k] * 4.0 + (1.0 - s.alpha_bar[k]);
  EXPECT_NEAR(var / expected, 1.0, 0.02);
}

TEST(Posterior, FirstStepReturnsEstimate) {
  const NoiseSchedule s = cosine_schedule(10);
  const ad::Mat a = randn(2, 6, 5), b = randn(2, 6, 6);
  EXPECT_LT((posterior_mean(a, b, 1, s) - b).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_THROW(posterior_mean(a, b, 0, s), InvalidInput);
}

TEST(Posterior, MatchesIndependentFormula) {
  const NoiseSchedule s = cosine_schedule(100);
  Rng rng(7);
  for (int rep = 0; rep < 10; ++rep) {
    const int k = rng.uniform_int(1, 100);
    const ad::Mat tk = randn(3, 10, 100 + rep), t0 = randn(3, 10, 200 + rep);
    const double ab = s.alpha_bar[k], abp = s.alpha_bar[k - 1], al = s.alpha[k], be = s.beta[k];
    ad::Mat expect(3, 10);
    for (Eigen::Index i = 0; i < expect.size(); ++i) {
      expect.data()[i] = std::sqrt(abp) * be / (1.0 - ab) * t0.data()[i] +
                         std::sqrt(al) * (1.0 - abp) / (1.0 - ab) * tk.data()[i];
    }
    EXPECT_LT((posterior_mean(tk, t0, k, s) - expect).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Posterior, DegenerateScheduleKeepsInput) {
  NoiseSchedule s;
  s.K = 2;
  s.beta = {0.0, 1e-9, 1e-9};
  s.alpha = {1.0, 1.0 - 1e-9, 1.0 - 1e-9};
  s.alpha_bar = {1.0, 1.0 - 1e-9, (1.0 - 1e-9) * (1.0 - 1e-9)};
  const ad::Mat t = randn(2, 4, 8);
  EXPECT_LT((posterior_mean(t, t, 2, s) - t).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Ddim, DeterministicChainRecoversCleanField) {
  for (int K : {5, 100}) {
    const NoiseSchedule s = cosine_schedule(K);
    const ad::Mat clean = randn(3, 16, 9);
    const ad::Mat eps = randn(3, 16, 10);
    ad::Mat tau = forward_noise(clean, K, s, eps);
    for (int k = K; k >= 1; --k) tau = ddim_step(tau, clean, k, s);
    EXPECT_LT((tau - clean).cwiseAbs().maxCoeff(), 1e-6) << "K=" << K;
  }
}

TEST(Ddim, Bitwise) {
  const NoiseSchedule s = cosine_schedule(5);
  const ad::Mat a = randn(2, 8, 11), b = randn(2, 8, 12);
  EXPECT_EQ(ddim_step(a, b, 3, s), ddim_step(a, b, 3, s));
}

TEST(Ddim, UnitEtaMeanIsPosteriorMean) {
  const NoiseSchedule s = cosine_schedule(100);
  const ad::Mat a = randn(2, 8, 13), b = randn(2, 8, 14);
  const ad::Mat zero = ad::Mat::Zero(2, 8);
  for (int k : {2, 17, 60, 100}) {
    EXPECT_LT((ddim_step(a, b, k, s, 1.0, &zero) - posterior_mean(a, b, k, s)).cwiseAbs().maxCoeff(),
              1e-12)
        << k;
  }
  EXPECT_THROW(ddim_step(a, b, 3, s, 1.0, nullptr), InvalidInput);
}

TEST(Cfg, Combination) {
  const ad::Mat c = randn(2, 6, 15), u = randn(2, 6, 16);
  EXPECT_EQ(cfg_combine(c, u, 0.0), c);
  EXPECT_EQ(cfg_combine(c, u, -1.0), u);
  EXPECT_LT((cfg_combine(c, u, 1.0) - (2.0 * c - u)).cwiseAbs().maxCoeff(), 1e-15);
  for (double w : {-0.5, 0.3, 2.0}) EXPECT_LT((cfg_combine(c, c, w) - c).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_THROW(cfg_combine(c, randn(3, 6, 1), 0.5), ShapeMismatch);
}

TEST(Guidance, ZeroStepIsIdentity) {
  const ad::Mat t = randn(2, 8, 17);
  FieldCost quad = [](const ad::Mat& f, ad::Mat* g) {
    if (g != nullptr) *g = f;
    return 0.5 * f.squaredNorm();
  };
  const GuidanceOutcome out = apply_clean_guidance(t, quad, 0.0, 1);
  EXPECT_EQ(out.field, t);
  EXPECT_FALSE(out.aborted);
}

TEST(Guidance, QuadraticCostShrinks) {
  const ad::Mat t = randn(2, 8, 18);
  FieldCost quad = [](const ad::Mat& f, ad::Mat* g) {
    if (g != nullptr) *g = f;
    return 0.5 * f.squaredNorm();
  };
  const GuidanceOutcome out = apply_clean_guidance(t, quad, 0.3, 1);
  EXPECT_LT((out.field - 0.7 * t).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Guidance, NonFiniteGradientAborts) {
  const ad::Mat t = randn(2, 8, 19);
  FieldCost bad = [](const ad::Mat& f, ad::Mat* g) {
    if (g != nullptr) {
      *g = f;
      (*g)(0, 0) = std::nan("");
    }
    return 0.0;
  };
  const GuidanceOutcome out = apply_clean_guidance(t, bad, 0.1, 1);
  EXPECT_TRUE(out.aborted);
  EXPECT_EQ(out.field, t);
}

TEST(Guidance, CollisionObjectiveDrawsAdversaryIn) {
  const std::vector<AgentState> init = {{-20.0, 0.0, 0.0, 5.0}, {20.0, 1.0, kPi, 5.0}};
  const ActionBounds b;
  const FieldCost cost = collision_field_cost(init, 0, 1, b, kDefaultDt);
  const ad::Mat field = ad::Mat::Zero(2, 32);
  const double before = cost(field, nullptr);
  for (double alpha : {1e-2, 3e-3, 1e-3}) {
    const GuidanceOutcome out = apply_clean_guidance(field, cost, alpha, 1);
    ASSERT_FALSE(out.aborted);
    EXPECT_LT(cost(out.field, nullptr), before) << alpha;
    const Trajectory t0 = rollout(init, field_to_actions(field, b, false), kDefaultDt);
    const Trajectory t1 = rollout(init, field_to_actions(out.field, b, false), kDefaultDt);
    EXPECT_GT(collision_cost(t1, 0, 1), collision_cost(t0, 0, 1));
    EXPECT_EQ(out.field.row(1), field.row(1));
  }
}

TEST(Guidance, CollisionObjectiveGradientMatchesFiniteDifferences) {
  const std::vector<AgentState> init = {{-20.0, 0.0, 0.1, 6.0}, {20.0, 1.0, kPi, 5.0}};
  const FieldCost cost = collision_field_cost(init, 0, 1, ActionBounds{}, kDefaultDt);
  const ad::Mat field = 0.1 * randn(2, 32, 20);
  ad::Mat g;
  cost(field, &g);
  const double h = 1e-6;
  for (Eigen::Index c = 0; c < field.cols(); c += 3) {
    ad::Mat p = field, m = field;
    p(0, c) += h;
    m(0, c) -= h;
    const double fd = (cost(p, nullptr) - cost(m, nullptr)) / (2 * h);
    EXPECT_NEAR(g(0, c), fd, 1e-5 * std::max(1.0, std::abs(fd))) << c;
  }
}

struct SamplerFixture {
  ModelConfig cfg;
  ParamSet params = init_params(21, cfg);
  NoiseSchedule sched = cosine_schedule(5);
  Scenario sc = generate_scenario(ScriptKind::Yield, 23, Vocabulary::standard());
  std::vector<LanePoint> lanes = lane_sample_points(sc.map, cfg.lane_spacing);

  SceneInput scene(bool text) const {
    SceneInput in;
    in.history = sc.history;
    in.lanes = &lanes;
    in.dims = sc.agent_dims;
    for (const PromptText& p : sc.prompts) in.prompts.push_back(text ? p.tokens : std::vector<int>{});
    return in;
  }
};

TEST(SampleJoint, DeterministicForFixedSeed) {
  SamplerFixture f;
  SampleConfig c;
  c.samples = 2;
  c.seed = 77;
  const SampleResult a = sample_joint(f.cfg, f.params, f.sched, f.scene(true), c);
  const SampleResult b = sample_joint(f.cfg, f.params, f.sched, f.scene(true), c);
  ASSERT_EQ(a.samples.size(), 2u);
  for (int m = 0; m < 2; ++m) {
    EXPECT_EQ(a.samples[m].field, b.samples[m].field);
    EXPECT_TRUE(a.samples[m].traj == b.samples[m].traj);
  }
  EXPECT_EQ(a.selected, b.selected);
  c.seed = 78;
  EXPECT_NE(sample_joint(f.cfg, f.params, f.sched, f.scene(true), c).samples[0].field, a.samples[0].field);
}

TEST(SampleJoint, UnconditionalWeightIgnoresPrompts) {
  SamplerFixture f;
  SampleConfig c;
  c.cfg_weight = -1.0;
  c.seed = 5;
  const SampleResult a = sample_joint(f.cfg, f.params, f.sched, f.scene(true), c);
  const SampleResult b = sample_joint(f.cfg, f.params, f.sched, f.scene(false), c);
  EXPECT_EQ(a.samples[0].field, b.samples[0].field);
  c.cfg_weight = 0.0;
  const SampleResult d = sample_joint(f.cfg, f.params, f.sched, f.scene(false), c);
  EXPECT_EQ(d.samples[0].field, a.samples[0].field);
}

TEST(SampleJoint, RandomParamsGiveFeasibleTrajectories) {
  SamplerFixture f;
  SampleConfig c;
  c.samples = 3;
  c.cfg_weight = 1.5;
  c.seed = 9;
  const SceneInput in = f.scene(true);
  const SampleResult r = sample_joint(f.cfg, f.params, f.sched, in, c);
  const ActionBounds b;
  std::vector<double> costs;
  for (const JointSample& s : r.samples) {
    const Trajectory& t = s.traj;
    ASSERT_EQ(t.horizon(), f.cfg.horizon);
    for (int i = 0; i < t.agent_count(); ++i) {
      EXPECT_EQ(t.state(i, 0), in.history.state(i, in.history.horizon()));
      for (int k = 0; k < t.horizon(); ++k) {
        EXPECT_LE(std::abs(t.action(i, k).accel), b.max_accel);
        EXPECT_LE(std::abs(t.action(i, k).yaw_rate), b.max_yaw_rate);
        EXPECT_EQ(t.state(i, k + 1), step_unicycle(t.state(i, k), t.action(i, k), t.dt()));
      }
    }
    costs.push_back(s.noncollision);
  }
  EXPECT_EQ(r.selected, argmin_index(costs));
}

TEST(SampleJoint, DdpmAndStochasticDdimRun) {
  SamplerFixture f;
  SampleConfig c;
  c.sampler = SamplerKind::Ddpm;
  c.seed = 3;
  EXPECT_TRUE(sample_joint(f.cfg, f.params, f.sched, f.scene(true), c).samples[0].field.allFinite());
  c.sampler = SamplerKind::Ddim;
  c.eta = 1.0;
  EXPECT_TRUE(sample_joint(f.cfg, f.params, f.sched, f.scene(true), c).samples[0].field.allFinite());
  c.samples = 0;
  EXPECT_THROW(sample_joint(f.cfg, f.params, f.sched, f.scene(true), c), InvalidInput);
}

TEST(SampleJoint, ArgminTiesGoToLowestIndex) {
  EXPECT_EQ(argmin_index({2.0, 1.0, 1.0, 3.0}), 1);
  EXPECT_EQ(argmin_index({0.0, 0.0}), 0);
}

}  // namespace
}  // namespace langsim
