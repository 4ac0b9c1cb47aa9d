// Copyright 2026 The LangSim Authors
// SPDX-License-Identifier: Apache-2.0
//
// Run configuration: one JSON document with optional sections
//   { "seed": 7, "workers": 1,
//     "data": {...}, "model": {...}, "train": {...}, "sample": {...},
//     "simulate": {...}, "evaluate": {...} }
// Unknown keys are rejected.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>

#include "json.hpp"
#include "langsim/core/error.hpp"
#include "langsim/io/weights.hpp"
#include "langsim/sim/rollout.hpp"
#include "langsim/synth/generator.hpp"
#include "langsim/training/openloop.hpp"

namespace langsim {

struct DataConfig {
  int count = 1000;
  std::map<ScriptKind, double> mix = uniform_mix();
  int max_background = 2;
};

struct EvalConfig {
  double laplace = kDefaultLaplace;
};

struct RunConfig {
  std::optional<std::uint64_t> seed;
  int workers = 1;
  DataConfig data;
  ModelConfig model;
  TrainConfig train;
  SimConfig sim;
  EvalConfig eval;
  int retarget_steps = 5;
  double cl_learning_rate = 1e-5;
  int cl_iterations = 500;

  std::uint64_t require_seed() const {
    if (!seed) throw InvalidInput("a seed is required (config \"seed\" or --seed)");
    return *seed;
  }
};

namespace detail {

class Section {
 public:
  Section(const nlohmann::json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw InvalidInput("config section '" + name_ + "' must be an object");
  }
  ~Section() = default;

  template <typename T>
  void get(const char* key, T& field) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      field = j_.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw InvalidInput("config key '" + name_ + "." + key + "' has the wrong type");
    }
  }

  const nlohmann::json* child(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw InvalidInput("unknown config key '" + name_ + "." + it.key() + "'");
    }
  }

 private:
  const nlohmann::json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

}  // namespace detail

inline RunConfig parse_run_config(const nlohmann::json& j) {
  RunConfig rc;
  detail::Section root(j, "");
  if (const auto* s = root.child("seed")) {
    if (!s->is_number_unsigned() && !(s->is_number_integer() && s->get<long long>() >= 0)) {
      throw InvalidInput("config key 'seed' must be a non-negative integer");
    }
    rc.seed = s->get<std::uint64_t>();
  }
  root.get("workers", rc.workers);
  if (const auto* d = root.child("data")) {
    detail::Section s(*d, "data");
    s.get("count", rc.data.count);
    s.get("max_background", rc.data.max_background);
    if (const auto* mix = s.child("mix")) {
      if (!mix->is_object() || mix->empty()) throw InvalidInput("config key 'data.mix' must be a non-empty object");
      rc.data.mix.clear();
      for (auto it = mix->begin(); it != mix->end(); ++it) {
        if (!it.value().is_number()) throw InvalidInput("data.mix weights must be numbers");
        rc.data.mix[script_from_string(it.key())] = it.value().get<double>();
      }
    }
    s.finish();
  }
  if (const auto* m = root.child("model")) {
    detail::Section s(*m, "model");
    for (const char* k : {"d_model", "d_lang", "heads", "blocks", "horizon", "history", "step_dim", "k_map",
                          "k_nbr", "max_tokens", "vocab_size", "ff_mult", "lane_spacing"}) {
      s.child(k);
    }
    s.finish();
    rc.model = model_config_from_json(*m);
  }
  if (const auto* t = root.child("train")) {
    detail::Section s(*t, "train");
    TrainConfig& tc = rc.train;
    s.get("learning_rate", tc.learning_rate);
    s.get("batch_size", tc.batch_size);
    s.get("iterations", tc.iterations);
    s.get("uncond_iterations", tc.uncond_iterations);
    s.get("diffusion_steps", tc.K);
    s.get("gamma", tc.gamma);
    s.get("t_replan", tc.t_replan);
    s.get("candidates", tc.m_candidates);
    s.get("closed_loop_steps", tc.closed_loop_steps);
    s.get("teacher_forcing_prob", tc.teacher_forcing_prob);
    s.get("teacher_agent_frac", tc.teacher_agent_frac);
    s.get("aux_noncollision_weight", tc.aux_noncollision_weight);
    s.get("cond_dropout_prob", tc.cond_dropout_prob);
    s.get("history_dropout_prob", tc.history_dropout_prob);
    s.get("clip_norm", tc.clip_norm);
    s.get("retarget_steps", rc.retarget_steps);
    s.get("cl_learning_rate", rc.cl_learning_rate);
    s.get("cl_iterations", rc.cl_iterations);
    s.finish();
  }
  if (const auto* t = root.child("sample")) {
    detail::Section s(*t, "sample");
    SampleConfig& sc = rc.sim.sample;
    s.get("samples", sc.samples);
    s.get("cfg_weight", sc.cfg_weight);
    std::string sampler = "ddim";
    s.get("sampler", sampler);
    if (sampler == "ddim") {
      sc.sampler = SamplerKind::Ddim;
    } else if (sampler == "ddpm") {
      sc.sampler = SamplerKind::Ddpm;
    } else {
      throw InvalidInput("sample.sampler must be ddim or ddpm");
    }
    s.get("eta", sc.eta);
    s.get("guidance_alpha", sc.guidance.alpha);
    s.get("guidance_steps", sc.guidance.steps);
    s.finish();
  }
  if (const auto* t = root.child("simulate")) {
    detail::Section s(*t, "simulate");
    std::string mode = to_string(rc.sim.mode);
    s.get("mode", mode);
    rc.sim.mode = sim_mode_from_string(mode);
    s.get("steps", rc.sim.steps);
    s.get("replan_interval", rc.sim.replan_interval);
    s.get("rollouts", rc.sim.rollouts);
    s.get("adversarial_text", rc.sim.adversarial_text);
    s.get("adversary", rc.sim.adversary);
    s.get("target", rc.sim.target);
    s.get("keep_samples", rc.sim.keep_samples);
    s.finish();
  }
  if (const auto* t = root.child("evaluate")) {
    detail::Section s(*t, "evaluate");
    s.get("laplace", rc.eval.laplace);
    s.finish();
  }
  root.finish();
  return rc;
}

inline RunConfig load_run_config(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidInput("config " + path + ": " + e.what());
  }
  return parse_run_config(j);
}

}  // namespace langsim
