// Copyright 2026 The LangSim Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <set>

#include "langsim/language/prompt.hpp"
#include "langsim/model/network.hpp"

namespace langsim {
namespace {

ScenarioLabels yield_labels() {
  ScenarioLabels l;
  l.tags.resize(2);
  l.interactions.push_back(make_interaction(0, 1, Subtype::IntersectionYielding));
  return l;
}

TEST(Prompt, YieldingClauseForActor) {
  const Vocabulary v = Vocabulary::standard();
  const PromptText p = compose_prompt(yield_labels(), 0, v);
  EXPECT_EQ(p.raw, "target agent yields to other agent1 at the intersection");
  EXPECT_EQ(p.target_agent, 0);
  EXPECT_FALSE(p.is_null());
  EXPECT_EQ(p.tokens.size(), 9u);
}

TEST(Prompt, RolesSwapForOtherTarget) {
  const Vocabulary v = Vocabulary::standard();
  const PromptText p = compose_prompt(yield_labels(), 1, v);
  EXPECT_EQ(p.raw, "other agent1 yields to target agent at the intersection");
  EXPECT_NE(p.tokens, compose_prompt(yield_labels(), 0, v).tokens);
}

TEST(Prompt, TagsAreAppended) {
  const Vocabulary v = Vocabulary::standard();
  ScenarioLabels l = yield_labels();
  l.tags[0].push_back({TagKind::SlowingDown});
  l.tags[0].push_back({TagKind::TurningLeft});
  EXPECT_EQ(compose_prompt(l, 0, v).raw,
            "target agent yields to other agent1 at the intersection and target agent is slowing "
            "down and turning left");
  EXPECT_EQ(compose_prompt(l, 0, v, false).raw,
            "target agent yields to other agent1 at the intersection");
}

TEST(Prompt, UninvolvedAgentGetsNullPrompt) {
  const Vocabulary v = Vocabulary::standard();
  ScenarioLabels l = yield_labels();
  l.tags.resize(3);
  const PromptText p = compose_prompt(l, 2, v);
  EXPECT_TRUE(p.is_null());
  EXPECT_TRUE(p.raw.empty());
}

TEST(Prompt, InvalidLabelsRejected) {
  const Vocabulary v = Vocabulary::standard();
  ScenarioLabels l = yield_labels();
  EXPECT_THROW(compose_prompt(l, 5, v), InvalidInput);
  l.interactions[0].actor = 4;
  EXPECT_THROW(compose_prompt(l, 0, v), InvalidInput);
  EXPECT_THROW(make_interaction(1, 1, Subtype::FollowingLead), InvalidInput);
}

TEST(Vocabulary, StandardIsClosedOverAllSentences) {
  const Vocabulary v = Vocabulary::standard();
  EXPECT_EQ(v.size(), static_cast<size_t>(ModelConfig{}.vocab_size));
  for (const SubtypeInfo& info : kSubtypes) {
    ScenarioLabels l;
    l.tags.resize(2);
    l.interactions.push_back(make_interaction(0, 1, info.subtype));
    for (TagKind k : kAllTagKinds) l.tags[0].push_back({k, LanePos::Middle, LanePos::Leftmost});
    EXPECT_NO_THROW(compose_prompt(l, 0, v)) << info.description;
    EXPECT_NO_THROW(compose_prompt(l, 1, v)) << info.description;
  }
}

TEST(Vocabulary, TokenizeRejectsUnknownWords) {
  const Vocabulary v = Vocabulary::standard();
  EXPECT_THROW(v.tokenize("target agent flies"), InvalidInput);
  const auto ids = v.tokenize("target agent");
  ASSERT_EQ(ids.size(), 2u);
  EXPECT_EQ(v.token(ids[0]), "target");
  EXPECT_THROW(Vocabulary({"a", "a"}), InvalidInput);
}

TEST(Vocabulary, SaveLoadRoundTrip) {
  const Vocabulary v = Vocabulary::standard();
  const std::string path = ::testing::TempDir() + "/vocab_roundtrip.txt";
  v.save(path);
  EXPECT_EQ(Vocabulary::load(path), v);
}

TEST(PromptEncoder, RoleSwappedPromptsEmbedDifferently) {
  const ModelConfig cfg;
  const ParamSet params = init_params(3, cfg);
  const Vocabulary v = Vocabulary::standard();
  const auto a = compose_prompt(yield_labels(), 0, v).tokens;
  const auto b = compose_prompt(yield_labels(), 1, v).tokens;
  ad::Tape t;
  const Network net(cfg, params);
  const ad::Mat e = t.value(net.encode_prompts(t, {a, b, {}}));
  ASSERT_EQ(e.rows(), 3);
  EXPECT_EQ(e.cols(), cfg.d_lang);
  EXPECT_GT((e.row(0) - e.row(1)).norm(), 1e-6);
  EXPECT_GT((e.row(0) - e.row(2)).norm(), 1e-6);
}

TEST(PromptEncoder, NullPromptMapsToNullEmbedding) {
  const ModelConfig cfg;
  const ParamSet params = init_params(3, cfg);
  ad::Tape t;
  const Network net(cfg, params);
  const ad::Mat e = t.value(net.encode_prompts(t, null_prompts(3)));
  EXPECT_EQ(e.row(0), e.row(1));
  EXPECT_EQ(e.row(1), e.row(2));
  std::vector<int> too_long(static_cast<size_t>(cfg.max_tokens) + 1, 0);
  EXPECT_THROW(net.encode_prompts(t, {too_long}), InvalidInput);
}

}  // namespace
}  // namespace langsim
