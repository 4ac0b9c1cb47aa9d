// Copyright 2026 The LangSim Authors
// SPDX-License-Identifier: Apache-2.0
//
// Open-loop denoising training (clean-sample regression) and schedule retargeting.

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "langsim/core/error.hpp"
#include "langsim/core/parallel.hpp"
#include "langsim/core/rng.hpp"
#include "langsim/diffusion/sampler.hpp"
#include "langsim/diffusion/schedule.hpp"
#include "langsim/model/features.hpp"
#include "langsim/model/network.hpp"
#include "langsim/synth/scenario.hpp"
#include "langsim/training/adam.hpp"

namespace langsim {

struct TrainConfig {
  double learning_rate = 1e-4;
  int batch_size = 16;
  int iterations = 5000;        // total optimizer steps
  int uncond_iterations = -1;   // first stage without text; -1 = half of iterations
  int K = 100;
  double gamma = 0.6;
  int t_replan = 2;
  int m_candidates = 8;
  int closed_loop_steps = 8;
  double teacher_forcing_prob = 0.5;
  double teacher_agent_frac = 0.7;
  double aux_noncollision_weight = 0.1;
  double cond_dropout_prob = 0.5;
  double history_dropout_prob = 0.0;
  double clip_norm = 1.0;
  std::uint64_t seed = 0;
  int workers = 1;

  void validate() const {
    require(learning_rate > 0.0 && std::isfinite(learning_rate), "TrainConfig: learning_rate");
    require(batch_size >= 1 && iterations >= 0 && K >= 1, "TrainConfig: batch/iterations/K");
    require(gamma > 0.0 && gamma <= 1.0, "TrainConfig: gamma must be in (0, 1]");
    require(t_replan >= 1 && m_candidates >= 1 && closed_loop_steps >= 1, "TrainConfig: rollout");
    for (double p : {teacher_forcing_prob, teacher_agent_frac, cond_dropout_prob, history_dropout_prob}) {
      require(p >= 0.0 && p <= 1.0, "TrainConfig: probabilities must be in [0, 1]");
    }
    require(aux_noncollision_weight >= 0.0, "TrainConfig: aux weight must be non-negative");
    require(workers >= 1, "TrainConfig: workers must be positive");
  }

  int stage1_iterations() const { return uncond_iterations < 0 ? iterations / 2 : uncond_iterations; }
};

/// Scenario plus the derived tensors training needs.
struct TrainingExample {
  const Scenario* scenario = nullptr;
  std::vector<LanePoint> lanes;
  ad::Mat gt_field;  // n x 2T normalized ground-truth actions
  std::vector<std::vector<int>> prompts;
  SceneFeatures features;
};

inline ActionGrid future_actions(const Scenario& sc) {
  ActionGrid g(static_cast<size_t>(sc.agent_count()));
  for (int i = 0; i < sc.agent_count(); ++i) {
    for (int t = 0; t < sc.future.horizon(); ++t) g[i].push_back(sc.future.action(i, t));
  }
  return g;
}

inline std::vector<std::vector<int>> scenario_prompts(const Scenario& sc) {
  std::vector<std::vector<int>> p(static_cast<size_t>(sc.agent_count()));
  for (int i = 0; i < sc.agent_count() && i < static_cast<int>(sc.prompts.size()); ++i) {
    p[i] = sc.prompts[i].tokens;
  }
  return p;
}

inline std::vector<TrainingExample> prepare_examples(const std::vector<Scenario>& data,
                                                     const ModelConfig& cfg,
                                                     const ActionBounds& bounds = {}) {
  std::vector<TrainingExample> out;
  out.reserve(data.size());
  for (const Scenario& sc : data) {
    require_shape(sc.future.horizon() == cfg.horizon, "prepare_examples: future length != model horizon");
    TrainingExample ex;
    ex.scenario = &sc;
    ex.lanes = lane_sample_points(sc.map, cfg.lane_spacing);
    ex.gt_field = actions_to_field(future_actions(sc), bounds);
    ex.prompts = scenario_prompts(sc);
    ex.features = scene_features(sc.history, ex.lanes, cfg);
    out.push_back(std::move(ex));
  }
  return out;
}

struct LossRecord {
  int iteration = 0;
  int stage = 0;
  double loss = 0.0;
  double aux = 0.0;
  double grad_norm = 0.0;
  bool skipped = false;
};

struct SampleDraw {
  int k = 1;
  bool drop_text = false;
  bool drop_history = false;
  std::uint64_t noise_seed = 0;
};

/// Loss and gradient of one example: mean squared error of the clean estimate.
inline double openloop_example_grad(const ModelConfig& cfg, const ParamSet& params,
                                    const TrainingExample& ex, const NoiseSchedule& sched,
                                    const SampleDraw& d, double scale, ParamSet& grads) {
  const int n = ex.features.agents;
  Rng rng(d.noise_seed);
  const ad::Mat eps = normal_field(n, cfg.action_dim(), rng);
  const ad::Mat tau_k = forward_noise(ex.gt_field, d.k, sched, eps);
  SceneFeatures dropped;
  const SceneFeatures* sf = &ex.features;
  if (d.drop_history) {
    const std::vector<std::uint8_t> mask(static_cast<size_t>(n), 1);
    dropped = scene_features(ex.scenario->history, ex.lanes, cfg, &mask);
    sf = &dropped;
  }
  ad::Tape t;
  const Network net(cfg, params, &grads);
  const ad::Var z = net.encode_scene(t, *sf);
  const ad::Var l = net.fuse(t, net.encode_prompts(t, d.drop_text ? null_prompts(n) : ex.prompts), z);
  const ad::Var out = net.denoise(t, t.constant(tau_k), d.k, z, l, sf->rel, n);
  const ad::Mat diff = t.value(out) - ex.gt_field;
  const double numel = static_cast<double>(diff.size());
  t.backward(out, diff * (2.0 * scale / numel));
  return diff.squaredNorm() / numel;
}

struct BatchLoss {
  double loss = 0.0;
  ParamSet grads;
};

/// Mean loss over a batch and its gradient. Per-example gradients are summed in
/// batch order, so the result does not depend on the worker count.
inline BatchLoss openloop_loss(const ModelConfig& cfg, const ParamSet& params,
                               const std::vector<const TrainingExample*>& batch,
                               const NoiseSchedule& sched, Rng& rng, double cond_dropout,
                               double history_dropout = 0.0, int workers = 1) {
  require(!batch.empty(), "openloop_loss: empty batch");
  const int B = static_cast<int>(batch.size());
  std::vector<SampleDraw> draws(static_cast<size_t>(B));
  for (SampleDraw& d : draws) {
    d.k = rng.uniform_int(1, sched.K);
    d.drop_text = rng.bernoulli(cond_dropout);
    d.drop_history = rng.bernoulli(history_dropout);
    d.noise_seed = rng.next_u64();
  }
  std::vector<ParamSet> per(static_cast<size_t>(B));
  std::vector<double> losses(static_cast<size_t>(B));
  parallel_for(B, workers, [&](int b) {
    per[b] = params.zeros_like();
    losses[b] = openloop_example_grad(cfg, params, *batch[b], sched, draws[b], 1.0 / B, per[b]);
  });
  BatchLoss out{0.0, std::move(per[0])};
  out.loss = losses[0];
  for (int b = 1; b < B; ++b) {
    out.loss += losses[b];
    auto& dst = out.grads.entries();
    const auto& src = per[b].entries();
    for (size_t e = 0; e < dst.size(); ++e) dst[e].value += src[e].value;
  }
  out.loss /= B;
  return out;
}

using LossCallback = std::function<void(const LossRecord&)>;

/// Two-stage open-loop training: unconditional first, then text-conditioned with
/// conditioning dropout. Deterministic for a fixed seed.
inline ParamSet train_openloop(const ModelConfig& cfg, ParamSet params,
                               const std::vector<TrainingExample>& data, const TrainConfig& tc,
                               std::vector<LossRecord>* curve = nullptr,
                               const LossCallback& on_record = nullptr) {
  tc.validate();
  require(!data.empty(), "train_openloop: empty dataset");
  if (tc.iterations == 0) return params;
  const NoiseSchedule sched = cosine_schedule(tc.K);
  AdamState opt = AdamState::for_params(params);
  Rng rng(derive_seed(tc.seed, 0x0be11001u));
  const int stage1 = tc.stage1_iterations();
  for (int it = 0; it < tc.iterations; ++it) {
    std::vector<const TrainingExample*> batch;
    for (int b = 0; b < tc.batch_size; ++b) {
      batch.push_back(&data[static_cast<size_t>(rng.uniform_int(0, static_cast<int>(data.size()) - 1))]);
    }
    const bool uncond = it < stage1;
    BatchLoss bl = openloop_loss(cfg, params, batch, sched, rng, uncond ? 1.0 : tc.cond_dropout_prob,
                                 tc.history_dropout_prob, tc.workers);
    LossRecord rec;
    rec.iteration = it;
    rec.stage = uncond ? 1 : 2;
    rec.loss = bl.loss;
    rec.grad_norm = clip_grad_norm(bl.grads, tc.clip_norm);
    rec.skipped = !optimizer_step(params, bl.grads, opt, tc.learning_rate);
    if (curve != nullptr) curve->push_back(rec);
    if (on_record) on_record(rec);
  }
  return params;
}

/// Continues open-loop training under a new step count; the returned parameters
/// are meant to be sampled with cosine_schedule(K_new).
inline ParamSet retarget_schedule(const ModelConfig& cfg, ParamSet params, int k_new,
                                  const std::vector<TrainingExample>& data, TrainConfig tc,
                                  std::vector<LossRecord>* curve = nullptr,
                                  const LossCallback& on_record = nullptr) {
  require(k_new >= 1, "retarget_schedule: K_new must be at least 1");
  tc.K = k_new;
  tc.uncond_iterations = 0;
  return train_openloop(cfg, std::move(params), data, tc, curve, on_record);
}

}  // namespace langsim
