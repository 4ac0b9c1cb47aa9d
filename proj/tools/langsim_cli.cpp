// Copyright 2026 The LangSim Authors
// SPDX-License-Identifier: Apache-2.0
//
// langsim: data generation, training, simulation, evaluation and rendering.
// Exit codes: 0 success, 2 validation error, 3 runtime error.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "langsim/cli/commands.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<int> workers;
  std::string data;
  std::string checkpoint;
  std::string rollouts;
  std::string paired;
  std::optional<std::string> mode;
  std::optional<double> cfg_weight;
  std::optional<int> samples;
  std::optional<double> guidance_alpha;
  std::optional<int> rollout_count;
  std::optional<int> count;
  std::optional<int> steps;
  int index = 0;
  bool force = false;
};

langsim::RunConfig resolve(const Options& o) {
  langsim::RunConfig rc = o.config.empty() ? langsim::RunConfig{} : langsim::load_run_config(o.config);
  if (o.seed) rc.seed = *o.seed;
  if (o.workers) rc.workers = *o.workers;
  if (rc.workers < 1) throw langsim::InvalidInput("--workers must be at least 1");
  if (o.mode) rc.sim.mode = langsim::sim_mode_from_string(*o.mode);
  if (o.cfg_weight) rc.sim.sample.cfg_weight = *o.cfg_weight;
  if (o.samples) rc.sim.sample.samples = *o.samples;
  if (o.guidance_alpha) rc.sim.sample.guidance.alpha = *o.guidance_alpha;
  if (o.rollout_count) rc.sim.rollouts = *o.rollout_count;
  if (o.count) rc.data.count = *o.count;
  if (o.steps) rc.retarget_steps = *o.steps;
  rc.model.validate();
  rc.train.validate();
  return rc;
}

void need(const std::string& value, const char* flag) {
  if (value.empty()) throw langsim::InvalidInput(std::string("missing required flag ") + flag);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"langsim: language-conditioned diffusion traffic simulation"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--config", o.config, "run configuration (JSON)");
  app.add_option("--seed", o.seed, "master seed");
  app.add_option("--out", o.out, "output path");
  app.add_option("--workers", o.workers, "worker threads");

  auto* gen = app.add_subcommand("gen-data", "generate a synthetic scenario dataset");
  gen->add_option("--count", o.count, "number of scenarios");

  auto* train = app.add_subcommand("train", "open-loop training");
  auto* retarget = app.add_subcommand("retarget", "retarget a checkpoint to fewer diffusion steps");
  retarget->add_option("--steps", o.steps, "new diffusion step count");
  auto* train_cl = app.add_subcommand("train-cl", "closed-loop fine-tuning");
  train_cl->add_flag("--force", o.force, "allow a source that was not retargeted");
  auto* simulate = app.add_subcommand("simulate", "closed-loop simulation");
  simulate->add_option("--mode", o.mode, "uncond | text | adversarial");
  simulate->add_option("--cfg-weight", o.cfg_weight, "classifier-free guidance weight");
  simulate->add_option("--samples", o.samples, "joint samples per replan (M)");
  simulate->add_option("--guidance-alpha", o.guidance_alpha, "collision guidance step size");
  simulate->add_option("--rollouts", o.rollout_count, "independent rollouts per scenario");
  auto* evaluate = app.add_subcommand("evaluate", "realism metrics, minADE and collision rate");
  evaluate->add_option("--paired", o.paired, "unconditional rollouts for a paired comparison");
  auto* render = app.add_subcommand("render", "SVG drawing of one scenario");
  render->add_option("--index", o.index, "scenario index");

  for (auto* cmd : {train, retarget, train_cl, simulate, evaluate, render}) {
    cmd->add_option("--data", o.data, "dataset directory or scenarios.jsonl");
  }
  for (auto* cmd : {retarget, train_cl, simulate}) {
    cmd->add_option("--checkpoint", o.checkpoint, "source checkpoint");
  }
  for (auto* cmd : {evaluate, render}) cmd->add_option("--rollouts", o.rollouts, "rollout file");
  for (auto* cmd : {gen, train, retarget, train_cl, simulate, evaluate, render}) cmd->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    const langsim::RunConfig rc = resolve(o);
    need(o.out, "--out");
    if (gen->parsed()) {
      langsim::cmd_gen_data(rc, o.out);
    } else if (train->parsed()) {
      need(o.data, "--data");
      langsim::cmd_train(rc, o.data, o.out);
    } else if (retarget->parsed()) {
      need(o.data, "--data");
      need(o.checkpoint, "--checkpoint");
      langsim::cmd_retarget(rc, o.data, o.checkpoint, o.out);
    } else if (train_cl->parsed()) {
      need(o.data, "--data");
      need(o.checkpoint, "--checkpoint");
      langsim::cmd_train_cl(rc, o.data, o.checkpoint, o.out, o.force);
    } else if (simulate->parsed()) {
      need(o.data, "--data");
      need(o.checkpoint, "--checkpoint");
      langsim::cmd_simulate(rc, o.data, o.checkpoint, o.out);
    } else if (evaluate->parsed()) {
      need(o.data, "--data");
      need(o.rollouts, "--rollouts");
      const auto report = langsim::cmd_evaluate(rc, o.data, o.rollouts, o.out, o.paired);
      std::cout << report.dump(2) << "\n";
    } else if (render->parsed()) {
      need(o.data, "--data");
      langsim::cmd_render(o.data, o.index, o.rollouts, o.out);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
