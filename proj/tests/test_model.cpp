// Copyright 2026 The LangSim Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "langsim/core/rng.hpp"
#include "langsim/model/network.hpp"
#include "langsim/synth/generator.hpp"

namespace langsim {
namespace {

const Vocabulary& vocab() {
  static const Vocabulary v = Vocabulary::standard();
  return v;
}

struct Moved {
  Trajectory history;
  std::vector<LanePoint> lanes;
};

Moved move_scene(const Trajectory& h, const std::vector<LanePoint>& lanes, double angle, Vec2 shift) {
  const double c = std::cos(angle), s = std::sin(angle);
  auto rot = [&](const Vec2& p) { return Vec2(c * p.x() - s * p.y(), s * p.x() + c * p.y()); };
  Moved m{h, lanes};
  for (int i = 0; i < h.agent_count(); ++i) {
    for (int t = 0; t <= h.horizon(); ++t) {
      AgentState& st = m.history.state(i, t);
      const Vec2 p = rot(st.position()) + shift;
      st.x = p.x();
      st.y = p.y();
      st.heading = wrap_angle(st.heading + angle);
    }
  }
  for (LanePoint& lp : m.lanes) {
    lp.position = rot(lp.position) + shift;
    lp.direction = rot(lp.direction);
  }
  return m;
}

ad::Mat encode(const ModelConfig& cfg, const ParamSet& params, const Trajectory& h,
               const std::vector<LanePoint>& lanes) {
  ad::Tape t;
  const Network net(cfg, params);
  return t.value(net.encode_scene(t, scene_features(h, lanes, cfg)));
}

ad::Mat random_field(int rows, int cols, std::uint64_t seed) {
  Rng rng(seed);
  ad::Mat m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

struct Fixture {
  ModelConfig cfg;
  ParamSet params = init_params(11, cfg);
  Scenario sc = generate_scenario(ScriptKind::Yield, 5, vocab());
  std::vector<LanePoint> lanes = lane_sample_points(sc.map, cfg.lane_spacing);
  SceneFeatures sf = scene_features(sc.history, lanes, cfg);
  std::vector<std::vector<int>> prompts() const {
    std::vector<std::vector<int>> p;
    for (const PromptText& pt : sc.prompts) p.push_back(pt.tokens);
    return p;
  }
};

TEST(Params, DefaultCountMatchesClosedForm) {
  const ModelConfig cfg;
  const ParamSet p = init_params(1, cfg);
  EXPECT_EQ(param_count(cfg), 710880u);
  EXPECT_EQ(p.count(), param_count(cfg));
  EXPECT_LE(p.count(), 1000000u);
  EXPECT_TRUE(matches_config(p, cfg));
}

TEST(Params, InitIsDeterministic) {
  const ModelConfig cfg;
  EXPECT_TRUE(init_params(4, cfg) == init_params(4, cfg));
  EXPECT_FALSE(init_params(4, cfg) == init_params(5, cfg));
  EXPECT_TRUE(init_params(4, cfg).all_finite());
}

TEST(Params, InvalidConfigRejected) {
  ModelConfig cfg;
  cfg.heads = 3;
  EXPECT_THROW(cfg.validate(), InvalidInput);
  cfg = ModelConfig{};
  cfg.d_model = 0;
  EXPECT_THROW(param_count(cfg), InvalidInput);
}

TEST(Encoder, RigidMotionInvariance) {
  const ModelConfig cfg;
  const ParamSet params = init_params(2, cfg);
  Rng rng(99);
  const ScriptKind kinds[] = {ScriptKind::Follow, ScriptKind::Yield, ScriptKind::Merge,
                              ScriptKind::LaneChange};
  double worst = 0.0;
  for (int s = 0; s < 100; ++s) {
    const Scenario sc = generate_scenario(kinds[s % 4], derive_seed(300, s), vocab());
    const auto lanes = lane_sample_points(sc.map, cfg.lane_spacing);
    const ad::Mat base = encode(cfg, params, sc.history, lanes);
    const Moved m = move_scene(sc.history, lanes, rng.uniform(-kPi, kPi),
                               Vec2(rng.uniform(-200, 200), rng.uniform(-200, 200)));
    worst = std::max(worst, (encode(cfg, params, m.history, m.lanes) - base).cwiseAbs().maxCoeff());
  }
  EXPECT_LT(worst, 1e-5);
}

TEST(Encoder, TranslationInvariance) {
  Fixture f;
  const ad::Mat base = encode(f.cfg, f.params, f.sc.history, f.lanes);
  const Moved m = move_scene(f.sc.history, f.lanes, 0.0, Vec2(100.0, 50.0));
  EXPECT_LT((encode(f.cfg, f.params, m.history, m.lanes) - base).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Encoder, InvalidAgentIsFlaggedWithZeroEmbedding) {
  Fixture f;
  Trajectory h = f.sc.history;
  h.set_valid(1, h.horizon(), false);
  const SceneFeatures sf = scene_features(h, f.lanes, f.cfg);
  EXPECT_EQ(sf.flagged[1], 1);
  ad::Tape t;
  const Network net(f.cfg, f.params);
  const ad::Mat z = t.value(net.encode_scene(t, sf));
  EXPECT_EQ(z.row(1).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_GT(z.row(0).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Encoder, SingleStaticAgentIsDeterministic) {
  const ModelConfig cfg;
  const ParamSet params = init_params(8, cfg);
  Trajectory h(1, cfg.history, kDefaultDt);
  const ad::Mat a = encode(cfg, params, h, {});
  const ad::Mat b = encode(cfg, params, h, {});
  EXPECT_EQ(a, b);
  EXPECT_TRUE(a.allFinite());
}

TEST(Denoiser, ShapesAndDeterminism) {
  Fixture f;
  const int n = f.sf.agents;
  const Conditioning c = encode_conditioning(f.cfg, f.params, f.sf, f.prompts());
  const ad::Mat tau = random_field(n, f.cfg.action_dim(), 3);
  const ad::Mat a = denoise(f.cfg, f.params, tau, 4, c.z_enc, c.z_lang, c.rel, n);
  EXPECT_EQ(a.rows(), n);
  EXPECT_EQ(a.cols(), f.cfg.action_dim());
  EXPECT_EQ(a, denoise(f.cfg, f.params, tau, 4, c.z_enc, c.z_lang, c.rel, n));
  ad::Mat bad = tau;
  bad(0, 0) = std::nan("");
  EXPECT_THROW(denoise(f.cfg, f.params, bad, 4, c.z_enc, c.z_lang, c.rel, n), InvalidInput);
}

TEST(Denoiser, NullPromptsMatchUnconditionalPath) {
  Fixture f;
  const int n = f.sf.agents;
  const ad::Mat tau = random_field(n, f.cfg.action_dim(), 4);
  std::vector<std::vector<int>> nulls(static_cast<size_t>(n));
  const Conditioning a = encode_conditioning(f.cfg, f.params, f.sf, nulls);
  const Conditioning b = encode_conditioning(f.cfg, f.params, f.sf, null_prompts(n));
  EXPECT_EQ(denoise(f.cfg, f.params, tau, 2, a.z_enc, a.z_lang, a.rel, n),
            denoise(f.cfg, f.params, tau, 2, b.z_enc, b.z_lang, b.rel, n));
  const Conditioning c = encode_conditioning(f.cfg, f.params, f.sf, f.prompts());
  EXPECT_GT((denoise(f.cfg, f.params, tau, 2, c.z_enc, c.z_lang, c.rel, n) -
             denoise(f.cfg, f.params, tau, 2, a.z_enc, a.z_lang, a.rel, n))
                .cwiseAbs()
                .maxCoeff(),
            1e-8);
}

TEST(Denoiser, AgentPermutationEquivariance) {
  Fixture f;
  const int n = f.sf.agents;
  ASSERT_GE(n, 2);
  const ad::Mat tau = random_field(n, f.cfg.action_dim(), 5);
  const Conditioning c = encode_conditioning(f.cfg, f.params, f.sf, f.prompts());
  const ad::Mat out = denoise(f.cfg, f.params, tau, 3, c.z_enc, c.z_lang, c.rel, n);

  std::vector<int> perm(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) perm[i] = (i + 1) % n;
  auto permute = [&](const ad::Mat& m) {
    ad::Mat r(m.rows(), m.cols());
    for (int i = 0; i < n; ++i) r.row(i) = m.row(perm[i]);
    return r;
  };
  ad::Mat rel(c.rel.rows(), c.rel.cols());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) rel.row(i * n + j) = c.rel.row(perm[i] * n + perm[j]);
  }
  const ad::Mat pout = denoise(f.cfg, f.params, permute(tau), 3, permute(c.z_enc), permute(c.z_lang), rel, n);
  EXPECT_LT((pout - permute(out)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Denoiser, StackedGroupsMatchSeparateCalls) {
  Fixture f;
  const int n = f.sf.agents;
  const Conditioning c = encode_conditioning(f.cfg, f.params, f.sf, f.prompts());
  const Conditioning u = encode_conditioning(f.cfg, f.params, f.sf, null_prompts(n));
  const ad::Mat t1 = random_field(n, f.cfg.action_dim(), 6);
  const ad::Mat t2 = random_field(n, f.cfg.action_dim(), 7);
  ad::Mat tau(2 * n, f.cfg.action_dim());
  tau << t1, t2;
  ad::Mat zl(2 * n, f.cfg.d_model);
  zl << c.z_lang, u.z_lang;
  const ad::Mat both = denoise(f.cfg, f.params, tau, 5, c.z_enc, zl, c.rel, n);
  EXPECT_LT((both.topRows(n) - denoise(f.cfg, f.params, t1, 5, c.z_enc, c.z_lang, c.rel, n))
                .cwiseAbs()
                .maxCoeff(),
            1e-12);
  EXPECT_LT((both.bottomRows(n) - denoise(f.cfg, f.params, t2, 5, c.z_enc, u.z_lang, c.rel, n))
                .cwiseAbs()
                .maxCoeff(),
            1e-12);
}

double objective(const Fixture& f, const ParamSet& p, const ad::Mat& tau, int k, const ad::Mat& up) {
  const Conditioning c = encode_conditioning(f.cfg, p, f.sf, f.prompts());
  return (denoise(f.cfg, p, tau, k, c.z_enc, c.z_lang, c.rel, f.sf.agents).array() * up.array()).sum();
}

bool close_rel(double a, double b, double rel) {
  return std::abs(a - b) <= rel * std::max({std::abs(a), std::abs(b), 1e-4});
}

TEST(DenoiserGrad, ZeroUpstreamGivesZeroGradients) {
  Fixture f;
  const int n = f.sf.agents;
  const ad::Mat tau = random_field(n, f.cfg.action_dim(), 8);
  const DenoiseGrad g = denoise_grad(f.cfg, f.params, tau, 3, f.sf, f.prompts(),
                                     ad::Mat::Zero(n, f.cfg.action_dim()));
  EXPECT_EQ(g.tau.cwiseAbs().maxCoeff(), 0.0);
  for (const auto& e : g.params.entries()) EXPECT_EQ(e.value.cwiseAbs().maxCoeff(), 0.0) << e.name;
}

TEST(DenoiserGrad, ParameterSliceMatchesFiniteDifferences) {
  Fixture f;
  const int n = f.sf.agents;
  const ad::Mat tau = random_field(n, f.cfg.action_dim(), 9);
  const ad::Mat up = random_field(n, f.cfg.action_dim(), 10);
  const DenoiseGrad g = denoise_grad(f.cfg, f.params, tau, 3, f.sf, f.prompts(), up);
  Rng rng(12);
  const auto& entries = f.params.entries();
  const double h = 1e-4;
  int checked = 0;
  while (checked < 100) {
    const auto& e = entries[static_cast<size_t>(rng.uniform_int(0, static_cast<int>(entries.size()) - 1))];
    const Eigen::Index idx = rng.uniform_int(0, static_cast<int>(e.value.size()) - 1);
    const double analytic = g.params.at(e.name).data()[idx];
    ParamSet plus = f.params, minus = f.params;
    plus.at(e.name).data()[idx] += h;
    minus.at(e.name).data()[idx] -= h;
    const double fd = (objective(f, plus, tau, 3, up) - objective(f, minus, tau, 3, up)) / (2 * h);
    EXPECT_TRUE(close_rel(analytic, fd, 1e-3)) << e.name << "[" << idx << "] " << analytic << " vs " << fd;
    ++checked;
  }
}

TEST(DenoiserGrad, TauMatchesFiniteDifferences) {
  Fixture f;
  const int n = f.sf.agents;
  const ad::Mat tau = random_field(n, f.cfg.action_dim(), 13);
  const ad::Mat up = random_field(n, f.cfg.action_dim(), 14);
  const DenoiseGrad g = denoise_grad(f.cfg, f.params, tau, 2, f.sf, f.prompts(), up);
  Rng rng(15);
  const double h = 1e-4;
  for (int q = 0; q < 20; ++q) {
    const Eigen::Index idx = rng.uniform_int(0, static_cast<int>(tau.size()) - 1);
    ad::Mat plus = tau, minus = tau;
    plus.data()[idx] += h;
    minus.data()[idx] -= h;
    const double fd = (objective(f, f.params, plus, 2, up) - objective(f, f.params, minus, 2, up)) / (2 * h);
    EXPECT_TRUE(close_rel(g.tau.data()[idx], fd, 1e-3)) << idx << ": " << g.tau.data()[idx] << " vs " << fd;
  }
}

}  // namespace
}  // namespace langsim
