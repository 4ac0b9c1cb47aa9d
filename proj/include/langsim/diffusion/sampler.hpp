// Copyright 2026 The LangSim Authors
// SPDX-License-Identifier: Apache-2.0
//
// Joint sampling of multi-agent action fields with classifier-free guidance,
// clean (reconstruction) guidance and best-of-M selection.

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "langsim/core/dynamics.hpp"
#include "langsim/core/error.hpp"
#include "langsim/core/rng.hpp"
#include "langsim/core/types.hpp"
#include "langsim/costs/collision.hpp"
#include "langsim/diffusion/schedule.hpp"
#include "langsim/model/features.hpp"
#include "langsim/model/network.hpp"

namespace langsim {

// ---------------------------------------------------------------------------
// Action fields: row i = [a_0/a_max, w_0/w_max, a_1/a_max, ...].

inline ad::Mat actions_to_field(const ActionGrid& actions, const ActionBounds& b) {
  const Eigen::Index n = static_cast<Eigen::Index>(actions.size());
  const Eigen::Index T = n == 0 ? 0 : static_cast<Eigen::Index>(actions[0].size());
  ad::Mat f(n, 2 * T);
  for (Eigen::Index i = 0; i < n; ++i) {
    require_shape(static_cast<Eigen::Index>(actions[i].size()) == T, "actions_to_field: ragged grid");
    for (Eigen::Index t = 0; t < T; ++t) {
      f(i, 2 * t) = actions[i][t].accel / b.max_accel;
      f(i, 2 * t + 1) = actions[i][t].yaw_rate / b.max_yaw_rate;
    }
  }
  return f;
}

/// Exact inverse of actions_to_field; optionally clamps to the bounds.
inline ActionGrid field_to_actions(const ad::Mat& f, const ActionBounds& b, bool clamp) {
  require_shape(f.cols() % 2 == 0, "field_to_actions: odd column count");
  const Eigen::Index T = f.cols() / 2;
  ActionGrid g(static_cast<size_t>(f.rows()), std::vector<Action>(static_cast<size_t>(T)));
  for (Eigen::Index i = 0; i < f.rows(); ++i) {
    for (Eigen::Index t = 0; t < T; ++t) {
      Action a{f(i, 2 * t) * b.max_accel, f(i, 2 * t + 1) * b.max_yaw_rate};
      g[i][t] = clamp ? b.clamp(a) : a;
    }
  }
  return g;
}

/// Feasible trajectory from a field: actions are clamped, states are integrated.
inline Trajectory unroll_field(std::span<const AgentState> initial, const ad::Mat& f,
                               const ActionBounds& b, double dt) {
  require_shape(static_cast<Eigen::Index>(initial.size()) == f.rows(), "unroll_field: agent count");
  require(f.allFinite(), "unroll_field: non-finite action field");
  return rollout(initial, field_to_actions(f, b, true), dt);
}

// ---------------------------------------------------------------------------
// Clean guidance.

/// Differentiable scalar cost of one joint action field; writes dJ/dfield when grad is non-null.
using FieldCost = std::function<double(const ad::Mat& field, ad::Mat* grad)>;

struct GuidanceOutcome {
  ad::Mat field;
  bool aborted = false;
};

/// n_steps descent updates tau0 <- tau0 - alpha * dJ/dtau0. A non-finite gradient
/// abandons guidance and returns the unguided input.
inline GuidanceOutcome apply_clean_guidance(const ad::Mat& tau0, const FieldCost& cost, double alpha,
                                            int n_steps = 1) {
  require(std::isfinite(alpha) && n_steps >= 0, "apply_clean_guidance: invalid step settings");
  GuidanceOutcome out{tau0, false};
  if (alpha == 0.0 || n_steps == 0) return out;
  for (int s = 0; s < n_steps; ++s) {
    ad::Mat g = ad::Mat::Zero(out.field.rows(), out.field.cols());
    cost(out.field, &g);
    if (!g.allFinite()) return {tau0, true};
    out.field -= alpha * g;
  }
  if (!out.field.allFinite()) return {tau0, true};
  return out;
}

/// Guidance objective for adversarial runs: -collision_cost (the summed centre
/// distance), so descending it draws the adversary onto the target. Only the
/// adversary's actions receive gradient.
inline FieldCost collision_field_cost(std::vector<AgentState> initial, int adv, int target,
                                      ActionBounds b, double dt) {
  require(adv != target && adv >= 0 && target >= 0 && adv < static_cast<int>(initial.size()) &&
              target < static_cast<int>(initial.size()),
          "collision_field_cost: invalid agent ids");
  return [initial = std::move(initial), adv, target, b, dt](const ad::Mat& f, ad::Mat* grad) {
    const ActionGrid actions = field_to_actions(f, b, false);
    const Trajectory traj = rollout(initial, actions, dt);
    const double j = -collision_cost(traj, adv, target);
    if (grad != nullptr) {
      const std::vector<Vec2> gp = collision_cost_grad(traj, adv, target);
      std::vector<StateGrad> sg(gp.size());
      for (size_t t = 0; t < gp.size(); ++t) sg[t] = {-gp[t].x(), -gp[t].y(), 0.0, 0.0};
      std::vector<AgentState> states;
      for (int t = 0; t <= traj.horizon(); ++t) states.push_back(traj.state(adv, t));
      const std::vector<Action> ga = rollout_vjp(states, actions[static_cast<size_t>(adv)], sg, dt);
      grad->setZero(f.rows(), f.cols());
      for (size_t t = 0; t < ga.size(); ++t) {
        (*grad)(adv, 2 * static_cast<Eigen::Index>(t)) = ga[t].accel * b.max_accel;
        (*grad)(adv, 2 * static_cast<Eigen::Index>(t) + 1) = ga[t].yaw_rate * b.max_yaw_rate;
      }
    }
    return j;
  };
}

// ---------------------------------------------------------------------------
// Joint sampling.

enum class SamplerKind { Ddim, Ddpm };

struct GuidanceConfig {
  int adversary = -1;
  int target = -1;
  double alpha = 0.0;
  int steps = 1;

  bool enabled() const { return alpha != 0.0 && steps > 0 && adversary >= 0 && target >= 0; }
};

struct SampleConfig {
  int samples = 1;          // M
  double cfg_weight = 0.0;  // w
  SamplerKind sampler = SamplerKind::Ddim;
  double eta = 0.0;
  GuidanceConfig guidance;
  std::uint64_t seed = 0;

  void validate() const {
    require(samples >= 1, "SampleConfig: need at least one sample");
    require(std::isfinite(cfg_weight), "SampleConfig: non-finite cfg weight");
    require(eta >= 0.0 && std::isfinite(eta), "SampleConfig: eta must be non-negative");
    require(std::isfinite(guidance.alpha) && guidance.steps >= 0, "SampleConfig: bad guidance");
  }
};

/// Everything the sampler needs to know about the scene at the current time.
struct SceneInput {
  Trajectory history;  // observed window, last state = current
  const std::vector<LanePoint>* lanes = nullptr;
  std::vector<AgentDims> dims;
  std::vector<std::vector<int>> prompts;  // per agent, empty = null
  ActionBounds bounds;
};

struct JointSample {
  Trajectory traj;
  ad::Mat field;
  double noncollision = 0.0;
  bool guidance_aborted = false;
};

struct SampleResult {
  std::vector<JointSample> samples;
  int selected = 0;
};

/// Index of the smallest value; ties go to the lowest index.
inline int argmin_index(const std::vector<double>& v) {
  require(!v.empty(), "argmin_index: empty input");
  int best = 0;
  for (int i = 1; i < static_cast<int>(v.size()); ++i) {
    if (v[i] < v[best]) best = i;
  }
  return best;
}

inline SampleResult sample_joint(const ModelConfig& cfg, const ParamSet& params,
                                 const NoiseSchedule& sched, const SceneInput& scene,
                                 const SampleConfig& sc) {
  sc.validate();
  require(scene.lanes != nullptr, "sample_joint: lane points missing");
  const int n = scene.history.agent_count();
  require_shape(static_cast<int>(scene.dims.size()) == n && static_cast<int>(scene.prompts.size()) == n,
                "sample_joint: per-agent inputs disagree with the history");
  const int M = sc.samples;
  const int A = cfg.action_dim();
  const double dt = scene.history.dt();

  const SceneFeatures sf = scene_features(scene.history, *scene.lanes, cfg);
  const bool use_cond = sc.cfg_weight != -1.0;
  const bool use_uncond = sc.cfg_weight != 0.0;
  Conditioning cond, uncond;
  if (use_cond) cond = encode_conditioning(cfg, params, sf, scene.prompts);
  if (use_uncond) uncond = encode_conditioning(cfg, params, sf, null_prompts(n));
  const ad::Mat& z_enc = use_cond ? cond.z_enc : uncond.z_enc;
  ad::Mat z_lang;
  if (use_cond && use_uncond) {
    z_lang.resize(2 * n, cfg.d_model);
    z_lang << cond.z_lang, uncond.z_lang;
  } else {
    z_lang = use_cond ? cond.z_lang : uncond.z_lang;
  }

  std::vector<Rng> rngs;
  std::vector<ad::Mat> tau;
  for (int m = 0; m < M; ++m) {
    rngs.emplace_back(derive_seed(sc.seed, static_cast<std::uint64_t>(m)));
    tau.push_back(normal_field(n, A, rngs.back()));
  }
  const std::vector<AgentState> initial = [&] {
    std::vector<AgentState> s;
    for (int i = 0; i < n; ++i) s.push_back(scene.history.last_state(i));
    return s;
  }();
  FieldCost guide;
  if (sc.guidance.enabled()) {
    guide = collision_field_cost(initial, sc.guidance.adversary, sc.guidance.target, scene.bounds, dt);
  }
  std::vector<char> aborted(static_cast<size_t>(M), 0);

  const int copies = use_cond && use_uncond ? 2 : 1;
  for (int k = sched.K; k >= 1; --k) {
    ad::Mat x(static_cast<Eigen::Index>(copies) * M * n, A);
    for (int c = 0; c < copies; ++c) {
      for (int m = 0; m < M; ++m) x.middleRows((static_cast<Eigen::Index>(c) * M + m) * n, n) = tau[m];
    }
    const ad::Mat out = denoise(cfg, params, x, k, z_enc, z_lang, sf.rel, n);
    for (int m = 0; m < M; ++m) {
      ad::Mat hat;
      if (copies == 2) {
        hat = cfg_combine(out.middleRows(static_cast<Eigen::Index>(m) * n, n),
                          out.middleRows((static_cast<Eigen::Index>(M) + m) * n, n), sc.cfg_weight);
      } else {
        hat = out.middleRows(static_cast<Eigen::Index>(m) * n, n);
      }
      if (guide) {
        GuidanceOutcome g = apply_clean_guidance(hat, guide, sc.guidance.alpha, sc.guidance.steps);
        if (g.aborted) aborted[m] = 1;
        hat = std::move(g.field);
      }
      if (sc.sampler == SamplerKind::Ddpm) {
        const ad::Mat z = normal_field(n, A, rngs[m]);
        tau[m] = k > 1 ? ddpm_step(tau[m], hat, k, sched, z) : hat;
      } else if (sc.eta > 0.0) {
        const ad::Mat z = normal_field(n, A, rngs[m]);
        tau[m] = ddim_step(tau[m], hat, k, sched, sc.eta, &z);
      } else {
        tau[m] = ddim_step(tau[m], hat, k, sched);
      }
    }
  }

  SampleResult res;
  const std::vector<DiskSet> disks = disk_sets(scene.dims);
  std::vector<double> costs;
  for (int m = 0; m < M; ++m) {
    JointSample js;
    js.field = tau[m];
    js.traj = unroll_field(initial, js.field, scene.bounds, dt);
    js.noncollision = no_collision_loss(js.traj, disks, PairAggregation::Cap, 1);
    js.guidance_aborted = aborted[m] != 0;
    costs.push_back(js.noncollision);
    res.samples.push_back(std::move(js));
  }
  res.selected = argmin_index(costs);
  return res;
}

}  // namespace langsim
