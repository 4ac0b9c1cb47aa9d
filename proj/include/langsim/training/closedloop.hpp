// Copyright 2026 The LangSim Authors
// SPDX-License-Identifier: Apache-2.0
//
// Closed-loop fine-tuning: the model replans from its own executed history,
// candidates come from one-step denoising of noised ground truth, and the loss
// on the executed rollout is backpropagated through the selected candidates.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "langsim/core/dynamics.hpp"
#include "langsim/core/error.hpp"
#include "langsim/core/parallel.hpp"
#include "langsim/core/rng.hpp"
#include "langsim/costs/collision.hpp"
#include "langsim/diffusion/sampler.hpp"
#include "langsim/diffusion/schedule.hpp"
#include "langsim/model/features.hpp"
#include "langsim/model/network.hpp"
#include "langsim/training/adam.hpp"
#include "langsim/training/openloop.hpp"

namespace langsim {

/// Largest noise level used during closed-loop training.
inline int closedloop_max_level(int K, double gamma) {
  const int kmax = static_cast<int>(std::floor(K * gamma + 1e-9));
  if (kmax < 1) throw InvalidInput("closed-loop training needs floor(K * gamma) >= 1");
  return kmax;
}

/// Mean L2 position error between each candidate and the reference over steps
/// 1..min(horizon, reference steps); returns the best index (ties: lowest).
inline int select_candidate(const std::vector<Trajectory>& candidates,
                            const std::vector<std::vector<Vec2>>& reference, int steps,
                            std::vector<double>* scores = nullptr) {
  require(!candidates.empty(), "select_candidate: no candidates");
  std::vector<double> d;
  for (const Trajectory& c : candidates) {
    require_shape(c.agent_count() == static_cast<int>(reference.size()),
                  "select_candidate: agent count mismatch");
    double s = 0.0;
    int n = 0;
    for (int i = 0; i < c.agent_count(); ++i) {
      for (int t = 1; t <= std::min(steps, c.horizon()); ++t) {
        s += (c.state(i, t).position() - reference[i][static_cast<size_t>(t)]).norm();
        ++n;
      }
    }
    d.push_back(n > 0 ? s / n : 0.0);
  }
  if (scores != nullptr) *scores = d;
  return argmin_index(d);
}

/// Diagnostics of one closed-loop training rollout.
struct ClosedLoopTrace {
  Trajectory executed;              // states 0..T_cl, state 0 = current ground truth
  std::vector<int> selected;        // per replan
  std::vector<int> levels;          // noise level per replan
  std::vector<char> teacher;        // per agent
  bool text_dropped = false;
  bool history_dropped = false;
  double state_loss = 0.0;
  double aux_loss = 0.0;
};

namespace detail {

/// Ground-truth actions for the window starting at `t0`, zero-padded past the recorded future.
inline ad::Mat gt_window_field(const Scenario& sc, int t0, int horizon, const ActionBounds& b) {
  ActionGrid g(static_cast<size_t>(sc.agent_count()), std::vector<Action>(static_cast<size_t>(horizon)));
  for (int i = 0; i < sc.agent_count(); ++i) {
    for (int t = 0; t < horizon; ++t) {
      if (t0 + t < sc.future.horizon()) g[i][t] = sc.future.action(i, t0 + t);
    }
  }
  return actions_to_field(g, b);
}

inline double state_error(const AgentState& a, const AgentState& g, StateGrad* grad, double scale) {
  const double dx = a.x - g.x, dy = a.y - g.y;
  const double ds = std::sin(a.heading) - std::sin(g.heading);
  const double dc = std::cos(a.heading) - std::cos(g.heading);
  const double dv = a.speed - g.speed;
  if (grad != nullptr) {
    grad->x += 2.0 * scale * dx;
    grad->y += 2.0 * scale * dy;
    grad->heading += 2.0 * scale * (ds * std::cos(a.heading) - dc * std::sin(a.heading));
    grad->speed += 2.0 * scale * dv;
  }
  return dx * dx + dy * dy + ds * ds + dc * dc + dv * dv;
}

}  // namespace detail

/// One closed-loop rollout on `ex`; accumulates `scale` * dLoss/dtheta into grads
/// and returns the total loss (state + weighted auxiliary).
inline double closedloop_example_grad(const ModelConfig& cfg, const ParamSet& params,
                                      const TrainingExample& ex, const TrainConfig& tc,
                                      const NoiseSchedule& sched, std::uint64_t seed, double scale,
                                      ParamSet* grads, ClosedLoopTrace* trace = nullptr,
                                      const ActionBounds& bounds = {}) {
  const Scenario& sc = *ex.scenario;
  const int n = sc.agent_count();
  const int H = cfg.history;
  const int T = cfg.horizon;
  const int Tcl = tc.closed_loop_steps;
  const double dt = sc.future.dt();
  require(Tcl <= sc.future.horizon(), "closed-loop horizon exceeds the recorded future");
  require_shape(sc.history.horizon() == H, "closed-loop: history length mismatch");
  const int kmax = closedloop_max_level(sched.K, tc.gamma);
  Rng rng(seed);

  ClosedLoopTrace tr;
  tr.teacher.assign(static_cast<size_t>(n), 0);
  if (rng.bernoulli(tc.teacher_forcing_prob)) {
    std::vector<int> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    for (int i = n - 1; i > 0; --i) std::swap(order[i], order[rng.uniform_int(0, i)]);
    const int count = static_cast<int>(std::lround(tc.teacher_agent_frac * n));
    for (int q = 0; q < count; ++q) tr.teacher[order[q]] = 1;
  }
  tr.text_dropped = rng.bernoulli(tc.cond_dropout_prob);
  tr.history_dropped = rng.bernoulli(tc.history_dropout_prob);
  const std::vector<std::vector<int>> prompts = tr.text_dropped ? null_prompts(n) : ex.prompts;
  const std::vector<std::uint8_t> drop_mask(static_cast<size_t>(n), tr.history_dropped ? 1 : 0);

  // Executed states: history window followed by the rollout.
  std::vector<std::vector<AgentState>> states(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    for (int t = 0; t <= H; ++t) states[i].push_back(sc.history.state(i, t));
  }
  struct Segment {
    int t0, len;
    SceneFeatures sf;
    ad::Mat tau_k;
    int k;
    ActionGrid raw;  // unclamped actions of the selected candidate
  };
  std::vector<Segment> segs;

  for (int t0 = 0; t0 < Tcl; t0 += tc.t_replan) {
    Trajectory hist(n, H, dt);
    for (int i = 0; i < n; ++i) {
      for (int t = 0; t <= H; ++t) hist.state(i, t) = states[i][states[i].size() - 1 - H + t];
    }
    Segment seg;
    seg.t0 = t0;
    seg.len = std::min(tc.t_replan, Tcl - t0);
    seg.sf = scene_features(hist, ex.lanes, cfg, &drop_mask);
    seg.k = rng.uniform_int(1, kmax);
    const ad::Mat gt = detail::gt_window_field(sc, t0, T, bounds);
    const int M = tc.m_candidates;
    ad::Mat stacked(static_cast<Eigen::Index>(M) * n, cfg.action_dim());
    std::vector<ad::Mat> noisy;
    for (int m = 0; m < M; ++m) {
      noisy.push_back(forward_noise(gt, seg.k, sched, normal_field(n, cfg.action_dim(), rng)));
      stacked.middleRows(static_cast<Eigen::Index>(m) * n, n) = noisy.back();
    }
    const Conditioning cond = encode_conditioning(cfg, params, seg.sf, prompts);
    const ad::Mat hats = denoise(cfg, params, stacked, seg.k, cond.z_enc, cond.z_lang, seg.sf.rel, n);

    std::vector<AgentState> cur;
    for (int i = 0; i < n; ++i) cur.push_back(states[i].back());
    const int ref_steps = std::max(0, std::min(T, sc.future.horizon() - t0));
    std::vector<std::vector<Vec2>> ref(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
      for (int t = 0; t <= ref_steps; ++t) ref[i].push_back(sc.future.state(i, t0 + t).position());
    }
    std::vector<Trajectory> cands;
    for (int m = 0; m < M; ++m) {
      cands.push_back(unroll_field(cur, hats.middleRows(static_cast<Eigen::Index>(m) * n, n), bounds, dt));
    }
    const int best = select_candidate(cands, ref, ref_steps);
    tr.selected.push_back(best);
    tr.levels.push_back(seg.k);
    seg.tau_k = noisy[best];
    seg.raw = field_to_actions(hats.middleRows(static_cast<Eigen::Index>(best) * n, n), bounds, false);
    for (int i = 0; i < n; ++i) {
      for (int s = 1; s <= seg.len; ++s) {
        states[i].push_back(tr.teacher[i] ? sc.future.state(i, t0 + s) : cands[best].state(i, s));
      }
    }
    segs.push_back(std::move(seg));
  }

  // Executed trajectory (global frame) and its loss.
  Trajectory exec(n, Tcl, dt);
  for (int i = 0; i < n; ++i) {
    for (int t = 0; t <= Tcl; ++t) exec.state(i, t) = states[i][static_cast<size_t>(H + t)];
  }
  std::vector<std::vector<StateGrad>> acc(static_cast<size_t>(n), std::vector<StateGrad>(Tcl + 1));
  const double ls = 1.0 / (static_cast<double>(n) * Tcl);
  double state_loss = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int t = 1; t <= Tcl; ++t) {
      state_loss += ls * detail::state_error(exec.state(i, t), sc.future.state(i, t), &acc[i][t], ls);
    }
  }
  const std::vector<DiskSet> disks = disk_sets(sc.agent_dims);
  const double aux = no_collision_loss(exec, disks, PairAggregation::Cap, 1);
  if (tc.aux_noncollision_weight > 0.0 && aux > 0.0) {
    const auto g = no_collision_loss_grad(exec, disks, 1);
    for (int i = 0; i < n; ++i) {
      for (int t = 1; t <= Tcl; ++t) {
        acc[i][t].x += tc.aux_noncollision_weight * g[i][t].x;
        acc[i][t].y += tc.aux_noncollision_weight * g[i][t].y;
        acc[i][t].heading += tc.aux_noncollision_weight * g[i][t].heading;
      }
    }
  }
  tr.state_loss = state_loss;
  tr.aux_loss = aux;
  tr.executed = exec;
  const double total = state_loss + tc.aux_noncollision_weight * aux;

  if (grads != nullptr) {
    // Reverse sweep over segments through the unicycle dynamics. Re-encoded scene
    // features are constants.
    std::vector<ad::Mat> upstream(segs.size());
    for (size_t r = segs.size(); r-- > 0;) {
      const Segment& seg = segs[r];
      upstream[r] = ad::Mat::Zero(n, cfg.action_dim());
      for (int i = 0; i < n; ++i) {
        if (tr.teacher[i]) continue;
        std::vector<AgentState> st;
        std::vector<Action> act;
        std::vector<StateGrad> sg;
        for (int s = 0; s <= seg.len; ++s) {
          st.push_back(exec.state(i, seg.t0 + s));
          sg.push_back(acc[i][seg.t0 + s]);
        }
        for (int s = 0; s < seg.len; ++s) act.push_back(bounds.clamp(seg.raw[i][s]));
        StateGrad g0;
        const std::vector<Action> ga = rollout_vjp(st, act, sg, dt, &g0);
        acc[i][seg.t0] = g0;
        for (int s = 0; s < seg.len; ++s) {
          const Action& a = seg.raw[i][s];
          if (std::abs(a.accel) < bounds.max_accel) upstream[r](i, 2 * s) = ga[s].accel * bounds.max_accel;
          if (std::abs(a.yaw_rate) < bounds.max_yaw_rate) {
            upstream[r](i, 2 * s + 1) = ga[s].yaw_rate * bounds.max_yaw_rate;
          }
        }
      }
    }
    for (size_t r = 0; r < segs.size(); ++r) {
      if (upstream[r].isZero(0.0)) continue;
      const Segment& seg = segs[r];
      ad::Tape t;
      const Network net(cfg, params, grads);
      const ad::Var z = net.encode_scene(t, seg.sf);
      const ad::Var l = net.fuse(t, net.encode_prompts(t, prompts), z);
      const ad::Var out = net.denoise(t, t.constant(seg.tau_k), seg.k, z, l, seg.sf.rel, n);
      t.backward(out, upstream[r] * scale);
    }
  }
  if (trace != nullptr) *trace = std::move(tr);
  return total;
}

/// Closed-loop fine-tuning loop (Adam, fixed-order gradient reduction).
inline ParamSet closedloop_train(const ModelConfig& cfg, ParamSet params,
                                 const std::vector<TrainingExample>& data, const TrainConfig& tc,
                                 std::vector<LossRecord>* curve = nullptr,
                                 const LossCallback& on_record = nullptr) {
  tc.validate();
  require(!data.empty(), "closedloop_train: empty dataset");
  closedloop_max_level(tc.K, tc.gamma);
  if (tc.iterations == 0) return params;
  const NoiseSchedule sched = cosine_schedule(tc.K);
  AdamState opt = AdamState::for_params(params);
  Rng rng(derive_seed(tc.seed, 0xc105ed100ull));
  for (int it = 0; it < tc.iterations; ++it) {
    const int B = tc.batch_size;
    std::vector<int> idx;
    std::vector<std::uint64_t> seeds;
    for (int b = 0; b < B; ++b) {
      idx.push_back(rng.uniform_int(0, static_cast<int>(data.size()) - 1));
      seeds.push_back(rng.next_u64());
    }
    std::vector<ParamSet> per(static_cast<size_t>(B));
    std::vector<double> losses(static_cast<size_t>(B));
    std::vector<double> aux(static_cast<size_t>(B));
    parallel_for(B, tc.workers, [&](int b) {
      per[b] = params.zeros_like();
      ClosedLoopTrace trace;
      losses[b] = closedloop_example_grad(cfg, params, data[static_cast<size_t>(idx[b])], tc, sched,
                                          seeds[b], 1.0 / B, &per[b], &trace);
      aux[b] = trace.aux_loss;
    });
    ParamSet g = std::move(per[0]);
    LossRecord rec;
    rec.iteration = it;
    rec.stage = 3;
    rec.loss = losses[0];
    rec.aux = aux[0];
    for (int b = 1; b < B; ++b) {
      rec.loss += losses[b];
      rec.aux += aux[b];
      auto& dst = g.entries();
      const auto& src = per[b].entries();
      for (size_t e = 0; e < dst.size(); ++e) dst[e].value += src[e].value;
    }
    rec.loss /= B;
    rec.aux /= B;
    rec.grad_norm = clip_grad_norm(g, tc.clip_norm);
    rec.skipped = !optimizer_step(params, g, opt, tc.learning_rate);
    if (curve != nullptr) curve->push_back(rec);
    if (on_record) on_record(rec);
  }
  return params;
}

}  // namespace langsim
