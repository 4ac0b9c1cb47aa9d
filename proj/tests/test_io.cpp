// Copyright 2026 The LangSim Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "langsim/cli/commands.hpp"

namespace langsim {
namespace {

namespace fs = std::filesystem;

std::string scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("langsim_io_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p.string();
}

RunConfig tiny_run(int count = 6) {
  RunConfig rc;
  rc.seed = 11;
  rc.data.count = count;
  rc.model.d_model = 32;
  rc.model.d_lang = 16;
  rc.model.heads = 2;
  rc.model.blocks = 1;
  rc.train.iterations = 4;
  rc.train.batch_size = 2;
  rc.train.K = 20;
  rc.retarget_steps = 4;
  rc.cl_iterations = 2;
  rc.sim.sample.samples = 2;
  return rc;
}

/// gen-data, train and retarget into `dir`; returns the retargeted checkpoint path.
std::string tiny_pipeline(const RunConfig& rc, const std::string& dir) {
  cmd_gen_data(rc, dir + "/data");
  cmd_train(rc, dir + "/data", dir + "/base.ckpt");
  cmd_retarget(rc, dir + "/data", dir + "/base.ckpt", dir + "/k.ckpt");
  return dir + "/k.ckpt";
}

TEST(Weights, LoadSaveIsBitIdentical) {
  const std::string dir = scratch_dir("weights");
  ModelConfig cfg = tiny_run().model;
  Checkpoint ck;
  ck.info = {cfg, 5, "retarget"};
  ck.params = init_params(3, cfg);
  quantize_to_float(ck.params);
  save_checkpoint(dir + "/a.ckpt", ck);
  const Checkpoint back = load_checkpoint(dir + "/a.ckpt");
  EXPECT_TRUE(back.params == ck.params);
  EXPECT_EQ(back.info.model, cfg);
  EXPECT_EQ(back.info.diffusion_steps, 5);
  EXPECT_EQ(back.info.stage, "retarget");
  save_checkpoint(dir + "/b.ckpt", back);
  EXPECT_EQ(read_file(dir + "/a.ckpt"), read_file(dir + "/b.ckpt"));
}

TEST(Weights, CorruptFileThrows) {
  const std::string dir = scratch_dir("corrupt");
  write_file(dir + "/x.ckpt", "not a checkpoint");
  EXPECT_ANY_THROW(load_checkpoint(dir + "/x.ckpt"));
}

TEST(ScenarioIo, RoundTrip) {
  const std::string dir = scratch_dir("scen");
  const Vocabulary vocab = Vocabulary::standard();
  std::vector<Scenario> data;
  for (int k = 0; k < static_cast<int>(kAllScripts.size()); ++k) {
    data.push_back(generate_scenario(kAllScripts[k], derive_seed(5, k), vocab));
  }
  save_scenarios(dir + "/s.jsonl", data);
  const std::vector<Scenario> back = load_scenarios(dir + "/s.jsonl");
  ASSERT_EQ(back.size(), data.size());
  for (size_t i = 0; i < data.size(); ++i) {
    EXPECT_EQ(scenario_to_line(back[i]), scenario_to_line(data[i]));
    EXPECT_EQ(back[i].future, data[i].future);
    EXPECT_EQ(back[i].history, data[i].history);
  }
}

TEST(ScenarioIo, MalformedLineThrows) {
  const std::string dir = scratch_dir("badscen");
  write_file(dir + "/s.jsonl", "{\"schema\": 1}\n");
  EXPECT_THROW(load_scenarios(dir + "/s.jsonl"), InvalidInput);
}

TEST(Config, ParsesSectionsAndRejectsUnknownKeys) {
  const RunConfig rc = parse_run_config(nlohmann::json::parse(
      R"({"seed": 3, "workers": 2, "sample": {"samples": 4, "cfg_weight": 0.5},
          "simulate": {"mode": "adversarial"}, "train": {"retarget_steps": 6}})"));
  EXPECT_EQ(rc.seed.value(), 3u);
  EXPECT_EQ(rc.workers, 2);
  EXPECT_EQ(rc.sim.sample.samples, 4);
  EXPECT_DOUBLE_EQ(rc.sim.sample.cfg_weight, 0.5);
  EXPECT_EQ(rc.sim.mode, SimMode::Adversarial);
  EXPECT_EQ(rc.retarget_steps, 6);
  EXPECT_THROW(parse_run_config(nlohmann::json::parse(R"({"sede": 3})")), InvalidInput);
  EXPECT_THROW(parse_run_config(nlohmann::json::parse(R"({"sample": {"samples": "x"}})")), InvalidInput);
  EXPECT_THROW(parse_run_config(nlohmann::json::parse(R"({"seed": -1})")), InvalidInput);
  EXPECT_THROW(parse_run_config(nlohmann::json::parse(R"({"sample": {"sampler": "euler"}})")), InvalidInput);
}

TEST(Config, MissingSeedIsAValidationError) {
  RunConfig rc;
  EXPECT_THROW(rc.require_seed(), InvalidInput);
  const std::string dir = scratch_dir("noseed");
  EXPECT_THROW(cmd_gen_data(rc, dir), InvalidInput);
}

TEST(Config, UnparsableFileIsAValidationError) {
  const std::string dir = scratch_dir("badcfg");
  write_file(dir + "/c.json", "{ seed: ");
  EXPECT_THROW(load_run_config(dir + "/c.json"), InvalidInput);
}

TEST(GenData, ManifestAndDeterminism) {
  const std::string a = scratch_dir("gen_a");
  const std::string b = scratch_dir("gen_b");
  RunConfig rc = tiny_run(40);
  cmd_gen_data(rc, a);
  rc.workers = 3;
  cmd_gen_data(rc, b);
  for (const char* f : {"/scenarios.jsonl", "/manifest.json", "/vocab.txt"}) {
    EXPECT_EQ(read_file(a + f), read_file(b + f)) << f;
  }
  const auto m = nlohmann::json::parse(read_file(a + "/manifest.json"));
  EXPECT_EQ(m["count"].get<int>(), 40);
  EXPECT_EQ(m["scenarios"].size(), 40u);
  EXPECT_EQ(load_dataset(a).size(), 40u);
}

TEST(GenData, YieldShareMatchesMix) {
  const std::string dir = scratch_dir("gen_mix");
  RunConfig rc = tiny_run(600);
  rc.data.mix = {{ScriptKind::Yield, 0.3}, {ScriptKind::Follow, 0.4}, {ScriptKind::LaneChange, 0.3}};
  cmd_gen_data(rc, dir);
  const auto m = nlohmann::json::parse(read_file(dir + "/manifest.json"));
  const double share = m["label_histogram"].value("yielding", 0) / 600.0;
  EXPECT_NEAR(share, 0.3, 0.03);
}

TEST(Pipeline, TrainingCommandsAndClGuard) {
  const std::string dir = scratch_dir("pipe");
  const RunConfig rc = tiny_run();
  const std::string k = tiny_pipeline(rc, dir);
  EXPECT_TRUE(fs::exists(dir + "/base.ckpt.loss.jsonl"));
  EXPECT_EQ(load_checkpoint(k).info.diffusion_steps, 4);
  EXPECT_THROW(cmd_train_cl(rc, dir + "/data", dir + "/base.ckpt", dir + "/cl.ckpt", false), InvalidInput);
  cmd_train_cl(rc, dir + "/data", dir + "/base.ckpt", dir + "/forced.ckpt", true);
  cmd_train_cl(rc, dir + "/data", k, dir + "/cl.ckpt", false);
  EXPECT_EQ(load_checkpoint(dir + "/cl.ckpt").info.stage, "closedloop");
  EXPECT_THROW(cmd_train(rc, dir + "/missing", dir + "/x.ckpt"), InvalidInput);
  EXPECT_THROW(cmd_retarget(rc, dir + "/data", dir + "/missing.ckpt", dir + "/x.ckpt"), InvalidInput);
}

TEST(Pipeline, SimulateEvaluateRender) {
  const std::string dir = scratch_dir("sim");
  RunConfig rc = tiny_run();
  const std::string k = tiny_pipeline(rc, dir);
  cmd_simulate(rc, dir + "/data", k, dir + "/r1.jsonl");
  rc.workers = 2;
  cmd_simulate(rc, dir + "/data", k, dir + "/r2.jsonl");
  EXPECT_EQ(read_file(dir + "/r1.jsonl"), read_file(dir + "/r2.jsonl"));

  const std::vector<RolloutFileRecord> recs = load_rollouts(dir + "/r1.jsonl");
  ASSERT_EQ(recs.size(), 6u);
  std::ofstream(dir + "/r_copy.jsonl") << rollout_to_json(recs[0]).dump() << '\n';
  EXPECT_EQ(rollout_to_json(load_rollouts(dir + "/r_copy.jsonl")[0]).dump(), rollout_to_json(recs[0]).dump());

  const auto rep = cmd_evaluate(rc, dir + "/data", dir + "/r1.jsonl", dir + "/rep.json");
  EXPECT_GT(rep["composite"].get<double>(), 0.0);
  EXPECT_LE(rep["composite"].get<double>(), 1.0);
  const auto paired = cmd_evaluate(rc, dir + "/data", dir + "/r1.jsonl", "", dir + "/r2.jsonl");
  EXPECT_DOUBLE_EQ(paired["min_ade_delta_m"].get<double>(),
                   paired["unconditional"]["min_ade_m"].get<double>() -
                       paired["conditional"]["min_ade_m"].get<double>());

  cmd_render(dir + "/data", 0, dir + "/r1.jsonl", dir + "/a.svg");
  cmd_render(dir + "/data", 0, dir + "/r1.jsonl", dir + "/b.svg");
  const std::string svg = read_file(dir + "/a.svg");
  EXPECT_EQ(svg, read_file(dir + "/b.svg"));
  const int n = load_dataset(dir + "/data")[0].agent_count();
  size_t groups = 0;
  for (size_t p = svg.find("class=\"agent\""); p != std::string::npos; p = svg.find("class=\"agent\"", p + 1)) ++groups;
  EXPECT_EQ(groups, static_cast<size_t>(n));
  EXPECT_THROW(cmd_render(dir + "/data", 99, "", dir + "/c.svg"), InvalidInput);
}

TEST(Evaluate, CountMismatchAndEmptyFiles) {
  const std::string dir = scratch_dir("evalerr");
  RunConfig rc = tiny_run(3);
  cmd_gen_data(rc, dir + "/data");
  const std::vector<Scenario> data = load_dataset(dir + "/data");
  RolloutFileRecord rec;
  rec.data.scenario_seed = data[0].seed;
  rec.data.rollouts.push_back({data[0].future, {}});
  std::ofstream(dir + "/one.jsonl") << rollout_to_json(rec).dump() << '\n';
  EXPECT_THROW(cmd_evaluate(rc, dir + "/data", dir + "/one.jsonl", ""), InvalidInput);
  std::ofstream(dir + "/empty.jsonl").close();
  EXPECT_THROW(cmd_evaluate(rc, dir + "/data", dir + "/empty.jsonl", ""), InvalidInput);
  EXPECT_THROW(cmd_evaluate(rc, dir + "/data", dir + "/absent.jsonl", ""), InvalidInput);
}

TEST(Render, MapOnlyDrawing) {
  const Scenario sc = generate_scenario(ScriptKind::Yield, 3, Vocabulary::standard());
  const std::string svg = render_svg(sc, nullptr);
  EXPECT_EQ(svg.find("class=\"agent\""), std::string::npos);
  EXPECT_NE(svg.find("<g id=\"map\">"), std::string::npos);
  EXPECT_NE(svg.find("<polyline"), std::string::npos);
}

}  // namespace
}  // namespace langsim
