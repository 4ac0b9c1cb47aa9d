// Copyright 2026 The LangSim Authors
// SPDX-License-Identifier: Apache-2.0
//
// Command implementations behind the command-line tool.

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "langsim/core/error.hpp"
#include "langsim/core/parallel.hpp"
#include "langsim/eval/evaluate.hpp"
#include "langsim/io/config.hpp"
#include "langsim/io/rollout_io.hpp"
#include "langsim/io/scenario_io.hpp"
#include "langsim/io/svg.hpp"
#include "langsim/io/weights.hpp"
#include "langsim/sim/rollout.hpp"
#include "langsim/synth/generator.hpp"
#include "langsim/training/closedloop.hpp"
#include "langsim/training/openloop.hpp"

namespace langsim {

/// Writes `lines` through per-worker shard files, then merges them in index order.
inline void write_sharded_lines(const std::string& path, const std::vector<std::string>& lines, int workers) {
  workers = std::max(1, std::min<int>(workers, std::max<int>(1, static_cast<int>(lines.size()))));
  std::vector<std::string> shards;
  for (int w = 0; w < workers; ++w) shards.push_back(path + ".shard" + std::to_string(w));
  parallel_for(workers, workers, [&](int w) {
    std::ofstream f(shards[w], std::ios::binary | std::ios::trunc);
    if (!f) throw RuntimeFailure("cannot write " + shards[w]);
    for (size_t i = static_cast<size_t>(w); i < lines.size(); i += static_cast<size_t>(workers)) f << lines[i] << '\n';
  });
  std::vector<std::ifstream> in;
  for (const std::string& s : shards) in.emplace_back(s, std::ios::binary);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw RuntimeFailure("cannot write " + path);
  std::string line;
  for (size_t i = 0; i < lines.size(); ++i) {
    if (!std::getline(in[i % static_cast<size_t>(workers)], line)) throw RuntimeFailure("shard merge failed");
    out << line << '\n';
  }
  in.clear();
  for (const std::string& s : shards) std::filesystem::remove(s);
  if (!out) throw RuntimeFailure("write failed: " + path);
}

inline void write_json(const std::string& path, const nlohmann::ordered_json& j) {
  write_file(path, j.dump(2) + "\n");
}

// ---------------------------------------------------------------------------

/// gen-data: <out>/scenarios.jsonl, <out>/manifest.json, <out>/vocab.txt.
inline void cmd_gen_data(const RunConfig& rc, const std::string& out_dir) {
  const std::uint64_t seed = rc.require_seed();
  require(rc.data.count >= 1, "data.count must be positive");
  std::filesystem::create_directories(out_dir);
  const Vocabulary vocab = Vocabulary::standard();
  const std::vector<ScriptKind> kinds = allocate_scripts(rc.data.mix, rc.data.count, seed);
  GeneratorParams gp;
  gp.max_background = rc.data.max_background;
  std::vector<Scenario> data(kinds.size());
  parallel_for(static_cast<int>(kinds.size()), rc.workers, [&](int i) {
    data[i] = generate_scenario(kinds[i], derive_seed(seed, static_cast<std::uint64_t>(i)), vocab, gp);
  });
  std::vector<std::string> lines;
  for (const Scenario& sc : data) lines.push_back(scenario_to_line(sc));
  write_sharded_lines(out_dir + "/scenarios.jsonl", lines, rc.workers);
  vocab.save(out_dir + "/vocab.txt");

  nlohmann::ordered_json m;
  m["schema"] = kScenarioSchemaVersion;
  m["seed"] = seed;
  m["count"] = rc.data.count;
  nlohmann::ordered_json mix;
  for (const auto& [k, w] : rc.data.mix) mix[to_string(k)] = w;
  m["mix"] = mix;
  std::map<std::string, int> scripts, labels;
  nlohmann::ordered_json entries = nlohmann::ordered_json::array();
  for (size_t i = 0; i < data.size(); ++i) {
    ++scripts[to_string(data[i].script)];
    for (const InteractionLabel& l : data[i].labels.interactions) {
      if (l.actor == data[i].interest_pair.first) ++labels[std::string(kind_name(l.kind))];
    }
    entries.push_back({{"index", i}, {"script", to_string(data[i].script)}, {"seed", data[i].seed}});
  }
  m["script_histogram"] = scripts;
  m["label_histogram"] = labels;
  m["scenarios"] = std::move(entries);
  write_json(out_dir + "/manifest.json", m);
}

inline std::vector<Scenario> load_dataset(const std::string& path) {
  const std::string file = std::filesystem::is_directory(path) ? path + "/scenarios.jsonl" : path;
  if (!std::filesystem::exists(file)) throw InvalidInput("dataset not found: " + file);
  std::vector<Scenario> data = load_scenarios(file);
  if (data.empty()) throw InvalidInput("dataset is empty: " + file);
  return data;
}

inline void check_dataset(const std::vector<Scenario>& data, const ModelConfig& cfg) {
  for (const Scenario& sc : data) {
    require_shape(sc.future.horizon() == cfg.horizon && sc.history.horizon() == cfg.history,
                  "dataset horizon does not match the model config");
    for (const PromptText& p : sc.prompts) {
      for (int t : p.tokens) require(t >= 0 && t < cfg.vocab_size, "prompt token outside the model vocabulary");
      require(static_cast<int>(p.tokens.size()) <= cfg.max_tokens, "prompt longer than model.max_tokens");
    }
  }
}

inline void write_loss_log(const std::string& path, const std::vector<LossRecord>& curve) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw RuntimeFailure("cannot write " + path);
  for (const LossRecord& r : curve) {
    nlohmann::ordered_json j;
    j["iteration"] = r.iteration;
    j["stage"] = r.stage;
    j["loss"] = r.loss;
    j["aux"] = r.aux;
    j["grad_norm"] = r.grad_norm;
    j["skipped"] = r.skipped;
    f << j.dump() << '\n';
  }
}

inline Checkpoint load_source_checkpoint(const std::string& path) {
  if (!std::filesystem::exists(path)) throw InvalidInput("checkpoint not found: " + path);
  return load_checkpoint(path);
}

/// train: open-loop training from a fresh initialisation.
inline void cmd_train(const RunConfig& rc, const std::string& data_path, const std::string& out) {
  const std::uint64_t seed = rc.require_seed();
  const std::vector<Scenario> data = load_dataset(data_path);
  check_dataset(data, rc.model);
  TrainConfig tc = rc.train;
  tc.seed = seed;
  tc.workers = rc.workers;
  const std::vector<TrainingExample> ex = prepare_examples(data, rc.model);
  std::vector<LossRecord> curve;
  Checkpoint ck;
  ck.info = {rc.model, tc.K, "openloop"};
  ck.params = train_openloop(rc.model, init_params(seed, rc.model), ex, tc, &curve);
  quantize_to_float(ck.params);
  save_checkpoint(out, ck);
  write_loss_log(out + ".loss.jsonl", curve);
}

/// retarget: continue open-loop training under retarget_steps diffusion steps.
inline void cmd_retarget(const RunConfig& rc, const std::string& data_path, const std::string& src,
                         const std::string& out) {
  const std::uint64_t seed = rc.require_seed();
  Checkpoint ck = load_source_checkpoint(src);
  const std::vector<Scenario> data = load_dataset(data_path);
  check_dataset(data, ck.info.model);
  TrainConfig tc = rc.train;
  tc.seed = seed;
  tc.workers = rc.workers;
  const std::vector<TrainingExample> ex = prepare_examples(data, ck.info.model);
  std::vector<LossRecord> curve;
  ck.params = retarget_schedule(ck.info.model, std::move(ck.params), rc.retarget_steps, ex, tc, &curve);
  quantize_to_float(ck.params);
  ck.info.diffusion_steps = rc.retarget_steps;
  ck.info.stage = "retarget";
  save_checkpoint(out, ck);
  write_loss_log(out + ".loss.jsonl", curve);
}

/// train-cl: closed-loop fine-tuning; refuses a source that was never retargeted unless forced.
inline void cmd_train_cl(const RunConfig& rc, const std::string& data_path, const std::string& src,
                         const std::string& out, bool force) {
  const std::uint64_t seed = rc.require_seed();
  Checkpoint ck = load_source_checkpoint(src);
  if (!force && ck.info.stage != "retarget" && ck.info.stage != "closedloop") {
    throw InvalidInput("closed-loop training expects a retargeted checkpoint (source has K=" +
                       std::to_string(ck.info.diffusion_steps) + ", stage " + ck.info.stage +
                       "); pass --force to override");
  }
  const std::vector<Scenario> data = load_dataset(data_path);
  check_dataset(data, ck.info.model);
  TrainConfig tc = rc.train;
  tc.seed = seed;
  tc.workers = rc.workers;
  tc.K = ck.info.diffusion_steps;
  tc.learning_rate = rc.cl_learning_rate;
  tc.iterations = rc.cl_iterations;
  const std::vector<TrainingExample> ex = prepare_examples(data, ck.info.model);
  std::vector<LossRecord> curve;
  ck.params = closedloop_train(ck.info.model, std::move(ck.params), ex, tc, &curve);
  quantize_to_float(ck.params);
  ck.info.stage = "closedloop";
  save_checkpoint(out, ck);
  write_loss_log(out + ".loss.jsonl", curve);
}

/// simulate: closed-loop rollouts for every scenario, one record per line.
inline void cmd_simulate(const RunConfig& rc, const std::string& data_path, const std::string& ckpt,
                         const std::string& out) {
  const std::uint64_t seed = rc.require_seed();
  const Checkpoint ck = load_source_checkpoint(ckpt);
  const std::vector<Scenario> data = load_dataset(data_path);
  check_dataset(data, ck.info.model);
  rc.sim.validate();
  const NoiseSchedule sched = cosine_schedule(ck.info.diffusion_steps);
  std::vector<std::string> lines(data.size());
  parallel_for(static_cast<int>(data.size()), rc.workers, [&](int i) {
    const std::vector<LanePoint> lanes = lane_sample_points(data[i].map, ck.info.model.lane_spacing);
    RolloutFileRecord rec;
    rec.scenario_index = i;
    rec.mode = rc.sim.mode;
    rec.data = simulate_scenario(ck.info.model, ck.params, sched, data[i], lanes, rc.sim,
                                 derive_seed(seed, static_cast<std::uint64_t>(i)));
    lines[i] = rollout_to_json(rec).dump();
  });
  write_sharded_lines(out, lines, rc.workers);
}

inline MetricReport evaluate_rollout_file(const RunConfig& rc, const std::vector<Scenario>& data,
                                          const std::string& path) {
  if (!std::filesystem::exists(path)) throw InvalidInput("rollout file not found: " + path);
  const std::vector<RolloutFileRecord> recs = load_rollouts(path);
  if (recs.empty()) throw InvalidInput("rollout file is empty: " + path);
  if (recs.size() != data.size()) {
    throw InvalidInput("rollout count (" + std::to_string(recs.size()) + ") does not match scenario count (" +
                       std::to_string(data.size()) + ")");
  }
  std::vector<EvalCase> cases;
  for (size_t i = 0; i < recs.size(); ++i) {
    const RolloutFileRecord& r = recs[i];
    require(r.scenario_index == static_cast<int>(i) && r.data.scenario_seed == data[i].seed,
            "rollout record " + std::to_string(i) + " does not belong to scenario " + std::to_string(i));
    require(!r.data.rollouts.empty(), "rollout record without runs");
    EvalCase ec;
    ec.scenario = &data[i];
    ec.rollouts = executed_trajectories(r.data);
    ec.collision_pair = {r.data.adversary, r.data.target};
    cases.push_back(std::move(ec));
  }
  return evaluate_cases(cases, default_statistics(), rc.eval.laplace, rc.workers);
}

/// evaluate: metric report; with `paired` also the unconditional report and the minADE delta.
inline nlohmann::ordered_json cmd_evaluate(const RunConfig& rc, const std::string& data_path,
                                           const std::string& rollouts, const std::string& out,
                                           const std::string& paired = "") {
  const std::vector<Scenario> data = load_dataset(data_path);
  const MetricReport rep = evaluate_rollout_file(rc, data, rollouts);
  nlohmann::ordered_json j;
  if (paired.empty()) {
    j = report_to_json(rep);
  } else {
    const MetricReport base = evaluate_rollout_file(rc, data, paired);
    j["conditional"] = report_to_json(rep);
    j["unconditional"] = report_to_json(base);
    j["min_ade_delta_m"] = base.min_ade - rep.min_ade;
  }
  if (!out.empty()) write_json(out, j);
  return j;
}

/// render: SVG of scenario `index`, optionally with the first executed rollout.
inline void cmd_render(const std::string& data_path, int index, const std::string& rollouts,
                       const std::string& out) {
  const std::vector<Scenario> data = load_dataset(data_path);
  require(index >= 0 && index < static_cast<int>(data.size()), "render: scenario index out of range");
  std::optional<Trajectory> traj;
  if (!rollouts.empty()) {
    const std::vector<RolloutFileRecord> recs = load_rollouts(rollouts);
    for (const RolloutFileRecord& r : recs) {
      if (r.scenario_index == index && !r.data.rollouts.empty()) traj = r.data.rollouts.front().executed;
    }
  }
  write_file(out, render_svg(data[static_cast<size_t>(index)], traj ? &*traj : nullptr));
}

}  // namespace langsim
