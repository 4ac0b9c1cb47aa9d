// Copyright 2026 The LangSim Authors
// SPDX-License-Identifier: Apache-2.0
//
// Closed-loop simulation with periodic replanning.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "langsim/core/error.hpp"
#include "langsim/core/rng.hpp"
#include "langsim/diffusion/sampler.hpp"
#include "langsim/synth/scenario.hpp"
#include "langsim/training/openloop.hpp"

namespace langsim {

enum class SimMode { Uncond, Text, Adversarial };

inline std::string to_string(SimMode m) {
  switch (m) {
    case SimMode::Uncond: return "uncond";
    case SimMode::Text: return "text";
    case SimMode::Adversarial: return "adversarial";
  }
  return "unknown";
}

inline SimMode sim_mode_from_string(const std::string& s) {
  if (s == "uncond") return SimMode::Uncond;
  if (s == "text") return SimMode::Text;
  if (s == "adversarial") return SimMode::Adversarial;
  throw InvalidInput("unknown simulation mode: " + s);
}

struct SimConfig {
  SimMode mode = SimMode::Text;
  int steps = 16;          // executed steps per rollout
  int replan_interval = 2;
  int rollouts = 1;        // independent closed-loop runs per scenario
  SampleConfig sample;     // M, w, sampler; guidance alpha/steps for adversarial mode
  bool adversarial_text = true;
  int adversary = -1;      // -1: first agent of the interest pair
  int target = -1;         // -1: second agent of the interest pair
  bool keep_samples = true;

  void validate() const {
    require(steps >= 1 && replan_interval >= 1 && rollouts >= 1, "SimConfig: steps/replan/rollouts");
    sample.validate();
  }
};

/// One replanning event.
struct PlanRecord {
  int t = 0;
  int selected = 0;
  std::vector<double> costs;
  std::vector<char> guidance_aborted;
  std::vector<Trajectory> samples;  // empty unless keep_samples
};

struct RolloutRecord {
  Trajectory executed;  // state 0 = current state of the scenario
  std::vector<PlanRecord> plans;
};

struct ScenarioRollouts {
  std::uint64_t scenario_seed = 0;
  int adversary = -1;
  int target = -1;
  std::vector<RolloutRecord> rollouts;
};

/// Runs cfg.rollouts closed-loop simulations of `sc`. Run r uses seed
/// derive_seed(seed, r); replan p inside it uses derive_seed(run_seed, p).
inline ScenarioRollouts simulate_scenario(const ModelConfig& cfg, const ParamSet& params,
                                          const NoiseSchedule& sched, const Scenario& sc,
                                          const std::vector<LanePoint>& lanes, const SimConfig& sim,
                                          std::uint64_t seed, const ActionBounds& bounds = {}) {
  sim.validate();
  const int n = sc.agent_count();
  const int H = cfg.history;
  require_shape(sc.history.horizon() == H, "simulate_scenario: history length mismatch");
  const double dt = sc.history.dt();

  ScenarioRollouts out;
  out.scenario_seed = sc.seed;
  SampleConfig base = sim.sample;
  std::vector<std::vector<int>> prompts = scenario_prompts(sc);
  if (sim.mode == SimMode::Adversarial) {
    require(n >= 2, "adversarial simulation needs at least two agents");
    out.adversary = sim.adversary >= 0 ? sim.adversary : sc.interest_pair.first;
    out.target = sim.target >= 0 ? sim.target : sc.interest_pair.second;
    require(out.adversary < n && out.target < n && out.adversary != out.target,
            "simulate_scenario: invalid adversary/target");
    base.guidance.adversary = out.adversary;
    base.guidance.target = out.target;
    if (!sim.adversarial_text) {
      prompts = null_prompts(n);
      base.cfg_weight = -1.0;
    }
  } else {
    base.guidance = GuidanceConfig{};
    if (sim.mode == SimMode::Uncond) {
      prompts = null_prompts(n);
      base.cfg_weight = -1.0;
    }
  }

  for (int r = 0; r < sim.rollouts; ++r) {
    const std::uint64_t run_seed = derive_seed(seed, static_cast<std::uint64_t>(r));
    std::vector<std::vector<AgentState>> states(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
      for (int t = 0; t <= H; ++t) states[i].push_back(sc.history.state(i, t));
    }
    RolloutRecord rec;
    rec.executed = Trajectory(n, sim.steps, dt);
    int p = 0;
    for (int t0 = 0; t0 < sim.steps; t0 += sim.replan_interval, ++p) {
      SceneInput in;
      in.history = Trajectory(n, H, dt);
      for (int i = 0; i < n; ++i) {
        for (int t = 0; t <= H; ++t) in.history.state(i, t) = states[i][states[i].size() - 1 - H + t];
      }
      in.lanes = &lanes;
      in.dims = sc.agent_dims;
      in.prompts = prompts;
      in.bounds = bounds;
      SampleConfig sc_p = base;
      sc_p.seed = derive_seed(run_seed, static_cast<std::uint64_t>(p));
      SampleResult res = sample_joint(cfg, params, sched, in, sc_p);
      const int len = std::min(sim.replan_interval, sim.steps - t0);
      const JointSample& sel = res.samples[static_cast<size_t>(res.selected)];
      for (int i = 0; i < n; ++i) {
        for (int s = 0; s < len; ++s) {
          rec.executed.action(i, t0 + s) = sel.traj.action(i, s);
          states[i].push_back(sel.traj.state(i, s + 1));
        }
      }
      PlanRecord plan;
      plan.t = t0;
      plan.selected = res.selected;
      for (JointSample& js : res.samples) {
        plan.costs.push_back(js.noncollision);
        plan.guidance_aborted.push_back(js.guidance_aborted ? 1 : 0);
        if (sim.keep_samples) plan.samples.push_back(std::move(js.traj));
      }
      rec.plans.push_back(std::move(plan));
    }
    for (int i = 0; i < n; ++i) {
      for (int t = 0; t <= sim.steps; ++t) rec.executed.state(i, t) = states[i][static_cast<size_t>(H + t)];
    }
    out.rollouts.push_back(std::move(rec));
  }
  return out;
}

/// Executed trajectories of every run.
inline std::vector<Trajectory> executed_trajectories(const ScenarioRollouts& r) {
  std::vector<Trajectory> out;
  for (const RolloutRecord& rec : r.rollouts) out.push_back(rec.executed);
  return out;
}

}  // namespace langsim
