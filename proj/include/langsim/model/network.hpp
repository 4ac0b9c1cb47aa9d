// Copyright 2026 The LangSim Authors
// SPDX-License-Identifier: Apache-2.0
//
// Scene encoder, prompt encoder and the conditional trajectory denoiser.
//
// The denoiser works on action fields flattened per agent: row i holds
// [a_0, w_0, a_1, w_1, ...] scaled by (1/a_max, 1/w_max). Several independent
// samples of the same scene may be stacked as row groups of N agents.

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "langsim/core/error.hpp"
#include "langsim/core/types.hpp"
#include "langsim/model/ad.hpp"
#include "langsim/model/features.hpp"
#include "langsim/model/params.hpp"

namespace langsim {

/// Sinusoidal embedding of the diffusion step.
inline ad::Mat step_embedding(int k, int dim) {
  const int half = dim / 2;
  ad::Mat e(1, dim);
  for (int i = 0; i < half; ++i) {
    const double f = std::exp(-std::log(10000.0) * static_cast<double>(i) / half);
    e(0, i) = std::sin(k * f);
    e(0, half + i) = std::cos(k * f);
  }
  return e;
}

class Network {
 public:
  Network(const ModelConfig& cfg, const ParamSet& params, ParamSet* grads = nullptr)
      : cfg_(cfg), params_(params), grads_(grads) {
    require(matches_config(params, cfg), "Network: parameters do not match the configuration");
    if (grads != nullptr) {
      require_shape(grads->same_layout(params), "Network: gradient buffer layout mismatch");
    }
  }

  const ModelConfig& config() const { return cfg_; }

  ad::Var param(ad::Tape& t, const std::string& name) const {
    return t.param(params_.at(name), grads_ != nullptr ? &grads_->at(name) : nullptr);
  }

  ad::Var linear(ad::Tape& t, ad::Var x, const std::string& name) const {
    return ad::add_row(t, ad::matmul(t, x, param(t, name + ".w")), param(t, name + ".b"));
  }

  ad::Var norm(ad::Tape& t, ad::Var x, const std::string& name) const {
    return ad::layer_norm(t, x, param(t, name + ".g"), param(t, name + ".b"));
  }

  ad::Var attention(ad::Tape& t, ad::Var x, ad::Var mem, const ad::Mat& rel, int n,
                    const std::string& name) const {
    const ad::Var q = linear(t, x, name + ".q");
    const ad::Var k = linear(t, mem, name + ".k");
    const ad::Var v = linear(t, mem, name + ".v");
    const ad::Var o = ad::rel_attention(t, q, k, v, rel, param(t, name + ".rk"),
                                        param(t, name + ".rv"), n, cfg_.heads);
    return linear(t, o, name + ".o");
  }

  /// Per-agent context embeddings z_enc (N x d); flagged agents get zero rows.
  ad::Var encode_scene(ad::Tape& t, const SceneFeatures& sf) const {
    require_shape(sf.features.cols() == cfg_.feature_dim(), "encode_scene: feature width mismatch");
    const ad::Var x = t.constant(sf.features);
    ad::Var h = ad::silu(t, linear(t, x, "enc.in"));
    h = linear(t, h, "enc.hidden");
    const ad::Var hn = norm(t, h, "enc.attn_norm");
    h = ad::add(t, h, attention(t, hn, hn, sf.rel, sf.agents, "enc.attn"));
    h = norm(t, h, "enc.out_norm");
    bool any_flag = false;
    std::vector<double> mask(static_cast<size_t>(sf.agents), 1.0);
    for (int i = 0; i < sf.agents; ++i) {
      if (sf.flagged[i]) {
        mask[i] = 0.0;
        any_flag = true;
      }
    }
    return any_flag ? ad::mask_rows(t, h, mask) : h;
  }

  /// Prompt embeddings e_lang (N x d_lang); an empty token list maps to the null embedding.
  ad::Var encode_prompts(ad::Tape& t, const std::vector<std::vector<int>>& tokens) const {
    require(!tokens.empty(), "encode_prompts: no agents");
    const ad::Var table = param(t, "lang.tok");
    const ad::Var pos = param(t, "lang.pos");
    const ad::Var null_row = param(t, "lang.null");
    std::vector<ad::Var> rows;
    rows.reserve(tokens.size());
    for (const auto& ids : tokens) {
      require(static_cast<int>(ids.size()) <= cfg_.max_tokens, "encode_prompts: prompt too long");
      rows.push_back(ids.empty() ? null_row : ad::embed_mean(t, table, pos, ids));
    }
    const ad::Var e = ad::concat_rows(t, rows);
    const ad::Var h = ad::silu(t, linear(t, e, "lang.ff1"));
    return linear(t, h, "lang.ff2");
  }

  /// z_lang = fuse([e_lang, z_enc]) (N x d).
  ad::Var fuse(ad::Tape& t, ad::Var e_lang, ad::Var z_enc) const {
    return linear(t, ad::concat_cols(t, e_lang, z_enc), "fuse");
  }

  /// Clean action field estimate for `tau` (G*n x 2T) at step k. z_enc is n x d;
  /// z_lang holds Gm groups of n rows, query group g reading group g*Gm/G.
  ad::Var denoise(ad::Tape& t, ad::Var tau, int k, ad::Var z_enc, ad::Var z_lang,
                  const ad::Mat& rel, int n) const {
    const ad::Mat& x = t.value(tau);
    require_shape(x.cols() == cfg_.action_dim() && n >= 1 && x.rows() % n == 0,
                  "denoise: action field shape mismatch");
    require_shape(t.value(z_enc).rows() == n && t.value(z_enc).cols() == cfg_.d_model,
                  "denoise: context embedding shape mismatch");
    require_shape(t.value(z_lang).cols() == cfg_.d_model && t.value(z_lang).rows() % n == 0,
                  "denoise: language embedding shape mismatch");
    require(x.allFinite(), "denoise: non-finite action field");
    require(k >= 0, "denoise: negative diffusion step");
    ad::Var h = linear(t, tau, "den.in");
    ad::Var s = t.constant(step_embedding(k, cfg_.step_dim));
    s = linear(t, ad::silu(t, linear(t, s, "den.step1")), "den.step2");
    h = ad::add_row(t, h, s);
    for (int b = 0; b < cfg_.blocks; ++b) {
      const std::string p = "den.block" + std::to_string(b);
      ad::Var hn = norm(t, h, p + ".self_norm");
      h = ad::add(t, h, attention(t, hn, hn, rel, n, p + ".self"));
      hn = norm(t, h, p + ".ctx_norm");
      h = ad::add(t, h, attention(t, hn, z_enc, rel, n, p + ".ctx"));
      hn = norm(t, h, p + ".text_norm");
      h = ad::add(t, h, attention(t, hn, z_lang, rel, n, p + ".text"));
      hn = norm(t, h, p + ".ff_norm");
      h = ad::add(t, h, linear(t, ad::silu(t, linear(t, hn, p + ".ff1")), p + ".ff2"));
    }
    return linear(t, norm(t, h, "den.out_norm"), "den.out");
  }

 private:
  const ModelConfig& cfg_;
  const ParamSet& params_;
  ParamSet* grads_;
};

/// Scene and language embeddings reused across every diffusion step of a sample.
struct Conditioning {
  ad::Mat z_enc;   // n x d
  ad::Mat z_lang;  // n x d
  ad::Mat rel;
  int agents = 0;
};

inline Conditioning encode_conditioning(const ModelConfig& cfg, const ParamSet& params,
                                        const SceneFeatures& sf,
                                        const std::vector<std::vector<int>>& prompts) {
  require_shape(static_cast<int>(prompts.size()) == sf.agents, "encode_conditioning: prompt count");
  ad::Tape t;
  const Network net(cfg, params);
  const ad::Var z = net.encode_scene(t, sf);
  const ad::Var l = net.fuse(t, net.encode_prompts(t, prompts), z);
  return {t.value(z), t.value(l), sf.rel, sf.agents};
}

/// Null prompts for every agent.
inline std::vector<std::vector<int>> null_prompts(int n) {
  return std::vector<std::vector<int>>(static_cast<size_t>(n));
}

/// Inference-only denoiser call on precomputed conditioning. `z_lang` may stack
/// several conditioning groups (see Network::denoise).
inline ad::Mat denoise(const ModelConfig& cfg, const ParamSet& params, const ad::Mat& tau, int k,
                       const ad::Mat& z_enc, const ad::Mat& z_lang, const ad::Mat& rel, int n) {
  ad::Tape t;
  const Network net(cfg, params);
  const ad::Var out = net.denoise(t, t.constant(tau), k, t.constant(z_enc), t.constant(z_lang), rel, n);
  return t.value(out);
}

struct DenoiseGrad {
  ParamSet params;  // d<upstream, out>/d theta
  ad::Mat tau;      // d<upstream, out>/d tau_k
};

/// Exact reverse-mode gradient of <upstream, denoise(...)> through the encoders as well.
inline DenoiseGrad denoise_grad(const ModelConfig& cfg, const ParamSet& params, const ad::Mat& tau,
                                int k, const SceneFeatures& sf,
                                const std::vector<std::vector<int>>& prompts,
                                const ad::Mat& upstream) {
  DenoiseGrad g{params.zeros_like(), ad::Mat()};
  ad::Tape t;
  const Network net(cfg, params, &g.params);
  const ad::Var x = t.input(tau, true);
  const ad::Var z = net.encode_scene(t, sf);
  const ad::Var l = net.fuse(t, net.encode_prompts(t, prompts), z);
  const ad::Var out = net.denoise(t, x, k, z, l, sf.rel, sf.agents);
  require_shape(upstream.rows() == t.value(out).rows() && upstream.cols() == t.value(out).cols(),
                "denoise_grad: upstream shape mismatch");
  t.backward(out, upstream);
  g.tau = t.grad(x);
  if (g.tau.size() == 0) g.tau = ad::Mat::Zero(tau.rows(), tau.cols());
  return g;
}

}  // namespace langsim
