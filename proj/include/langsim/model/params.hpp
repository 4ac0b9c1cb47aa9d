// Copyright 2026 The LangSim Authors
// SPDX-License-Identifier: Apache-2.0
//
// Model configuration, named parameter tensors and their initialisation.

#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "langsim/core/error.hpp"
#include "langsim/core/rng.hpp"
#include "langsim/model/ad.hpp"

namespace langsim {

struct ModelConfig {
  int d_model = 128;
  int d_lang = 64;
  int heads = 4;
  int blocks = 2;
  int horizon = 16;         // T future steps per denoised window
  int history = 2;          // past steps before the current state
  int step_dim = 32;        // sinusoidal diffusion-step embedding width
  int k_map = 16;
  int k_nbr = 8;
  int max_tokens = 64;
  int vocab_size = 88;
  int ff_mult = 2;
  double lane_spacing = 5.0;  // metres between sampled lane points

  static constexpr int kRelDim = 5;

  int feature_dim() const { return 5 * (history + 1) + 1 + 4 * k_map + 6 * k_nbr; }
  int action_dim() const { return 2 * horizon; }

  void validate() const {
    require(d_model > 0 && d_lang > 0 && heads > 0 && blocks >= 1 && horizon >= 1 &&
                history >= 0 && step_dim >= 2 && step_dim % 2 == 0 && k_map >= 1 && k_nbr >= 0 &&
                max_tokens >= 1 && vocab_size >= 1 && ff_mult >= 1 && lane_spacing > 0.0,
            "ModelConfig: invalid dimensions");
    require(d_model % heads == 0, "ModelConfig: d_model must be divisible by heads");
  }

  bool operator==(const ModelConfig&) const = default;
};

/// Ordered collection of named 2-D tensors.
class ParamSet {
 public:
  struct Entry {
    std::string name;
    ad::Mat value;
  };

  void add(const std::string& name, ad::Mat value) {
    require(index_.count(name) == 0, "ParamSet: duplicate tensor " + name);
    index_[name] = entries_.size();
    entries_.push_back({name, std::move(value)});
  }

  bool contains(const std::string& name) const { return index_.count(name) != 0; }

  ad::Mat& at(const std::string& name) {
    auto it = index_.find(name);
    require(it != index_.end(), "ParamSet: unknown tensor " + name);
    return entries_[it->second].value;
  }
  const ad::Mat& at(const std::string& name) const {
    auto it = index_.find(name);
    require(it != index_.end(), "ParamSet: unknown tensor " + name);
    return entries_[it->second].value;
  }

  std::vector<Entry>& entries() { return entries_; }
  const std::vector<Entry>& entries() const { return entries_; }

  size_t count() const {
    size_t n = 0;
    for (const Entry& e : entries_) n += static_cast<size_t>(e.value.size());
    return n;
  }

  /// Same names and shapes, all zeros.
  ParamSet zeros_like() const {
    ParamSet z;
    for (const Entry& e : entries_) z.add(e.name, ad::Mat::Zero(e.value.rows(), e.value.cols()));
    return z;
  }

  void set_zero() {
    for (Entry& e : entries_) e.value.setZero();
  }

  bool all_finite() const {
    for (const Entry& e : entries_) {
      if (!e.value.allFinite()) return false;
    }
    return true;
  }

  bool same_layout(const ParamSet& o) const {
    if (entries_.size() != o.entries_.size()) return false;
    for (size_t i = 0; i < entries_.size(); ++i) {
      const Entry& a = entries_[i];
      const Entry& b = o.entries_[i];
      if (a.name != b.name || a.value.rows() != b.value.rows() || a.value.cols() != b.value.cols()) {
        return false;
      }
    }
    return true;
  }

  bool operator==(const ParamSet& o) const {
    if (!same_layout(o)) return false;
    for (size_t i = 0; i < entries_.size(); ++i) {
      if (entries_[i].value != o.entries_[i].value) return false;
    }
    return true;
  }

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, size_t> index_;
};

namespace detail {

enum class InitKind { FanIn, Zero, One, Unit };

struct TensorSpec {
  std::string name;
  int rows;
  int cols;
  InitKind init;
};

inline void linear_specs(std::vector<TensorSpec>& out, const std::string& name, int in, int outd) {
  out.push_back({name + ".w", in, outd, InitKind::FanIn});
  out.push_back({name + ".b", 1, outd, InitKind::Zero});
}

inline void norm_specs(std::vector<TensorSpec>& out, const std::string& name, int d) {
  out.push_back({name + ".g", 1, d, InitKind::One});
  out.push_back({name + ".b", 1, d, InitKind::Zero});
}

inline void attention_specs(std::vector<TensorSpec>& out, const std::string& name, int d) {
  for (const char* p : {".q", ".k", ".v", ".o"}) linear_specs(out, name + p, d, d);
  out.push_back({name + ".rk", ModelConfig::kRelDim, d, InitKind::FanIn});
  out.push_back({name + ".rv", ModelConfig::kRelDim, d, InitKind::FanIn});
}

/// Every tensor of the model in a fixed order.
inline std::vector<TensorSpec> tensor_specs(const ModelConfig& c) {
  c.validate();
  const int d = c.d_model;
  const int dl = c.d_lang;
  std::vector<TensorSpec> s;
  // Scene encoder.
  linear_specs(s, "enc.in", c.feature_dim(), d);
  linear_specs(s, "enc.hidden", d, d);
  norm_specs(s, "enc.attn_norm", d);
  attention_specs(s, "enc.attn", d);
  norm_specs(s, "enc.out_norm", d);
  // Language encoder.
  s.push_back({"lang.tok", c.vocab_size, dl, InitKind::Unit});
  s.push_back({"lang.pos", c.max_tokens, dl, InitKind::Unit});
  s.push_back({"lang.null", 1, dl, InitKind::Unit});
  linear_specs(s, "lang.ff1", dl, dl);
  linear_specs(s, "lang.ff2", dl, dl);
  linear_specs(s, "fuse", dl + d, d);
  // Denoiser.
  linear_specs(s, "den.in", c.action_dim(), d);
  linear_specs(s, "den.step1", c.step_dim, d);
  linear_specs(s, "den.step2", d, d);
  for (int b = 0; b < c.blocks; ++b) {
    const std::string p = "den.block" + std::to_string(b);
    norm_specs(s, p + ".self_norm", d);
    attention_specs(s, p + ".self", d);
    norm_specs(s, p + ".ctx_norm", d);
    attention_specs(s, p + ".ctx", d);
    norm_specs(s, p + ".text_norm", d);
    attention_specs(s, p + ".text", d);
    norm_specs(s, p + ".ff_norm", d);
    linear_specs(s, p + ".ff1", d, c.ff_mult * d);
    linear_specs(s, p + ".ff2", c.ff_mult * d, d);
  }
  norm_specs(s, "den.out_norm", d);
  linear_specs(s, "den.out", d, c.action_dim());
  return s;
}

}  // namespace detail

/// Closed-form parameter count for a configuration.
inline size_t param_count(const ModelConfig& c) {
  c.validate();
  const size_t d = static_cast<size_t>(c.d_model);
  const size_t dl = static_cast<size_t>(c.d_lang);
  const size_t F = static_cast<size_t>(c.feature_dim());
  const size_t A = static_cast<size_t>(c.action_dim());
  const size_t r = ModelConfig::kRelDim;
  const size_t attn = 4 * (d * d + d) + 2 * r * d;
  const size_t norm = 2 * d;
  const size_t ff = static_cast<size_t>(c.ff_mult);
  const size_t enc = (F * d + d) + (d * d + d) + 2 * norm + attn;
  const size_t lang = (static_cast<size_t>(c.vocab_size) + static_cast<size_t>(c.max_tokens) + 1) * dl +
                      2 * (dl * dl + dl) + ((dl + d) * d + d);
  const size_t block = 3 * (norm + attn) + norm + (d * ff * d + ff * d) + (ff * d * d + d);
  const size_t den = (A * d + d) + (static_cast<size_t>(c.step_dim) * d + d) + (d * d + d) +
                     static_cast<size_t>(c.blocks) * block + norm + (d * A + A);
  return enc + lang + den;
}

/// Deterministic initialisation: weights U(-1/sqrt(fan_in), 1/sqrt(fan_in)), biases 0,
/// norm gains 1, embedding tables U(-1, 1) scaled by 1/sqrt(width).
inline ParamSet init_params(std::uint64_t seed, const ModelConfig& c) {
  ParamSet p;
  std::uint64_t stream = 0;
  for (const detail::TensorSpec& s : detail::tensor_specs(c)) {
    ad::Mat m(s.rows, s.cols);
    Rng rng(derive_seed(seed, stream++));
    switch (s.init) {
      case detail::InitKind::Zero:
        m.setZero();
        break;
      case detail::InitKind::One:
        m.setOnes();
        break;
      case detail::InitKind::FanIn:
      case detail::InitKind::Unit: {
        const double bound = 1.0 / std::sqrt(static_cast<double>(
                                       s.init == detail::InitKind::FanIn ? s.rows : s.cols));
        for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-bound, bound);
        break;
      }
    }
    p.add(s.name, std::move(m));
  }
  return p;
}

/// True when `p` has exactly the tensors `c` requires.
inline bool matches_config(const ParamSet& p, const ModelConfig& c) {
  const auto specs = detail::tensor_specs(c);
  if (specs.size() != p.entries().size()) return false;
  for (size_t i = 0; i < specs.size(); ++i) {
    const auto& e = p.entries()[i];
    if (e.name != specs[i].name || e.value.rows() != specs[i].rows ||
        e.value.cols() != specs[i].cols) {
      return false;
    }
  }
  return true;
}

}  // namespace langsim
