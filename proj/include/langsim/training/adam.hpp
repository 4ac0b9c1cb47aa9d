// Copyright 2026 The LangSim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>

#include "langsim/core/error.hpp"
#include "langsim/model/params.hpp"

namespace langsim {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  ParamSet m;
  ParamSet v;
  long step = 0;
  long skipped = 0;

  static AdamState for_params(const ParamSet& p) { return {p.zeros_like(), p.zeros_like(), 0, 0}; }
};

/// One bias-corrected adaptive-moment update. Non-finite gradients skip the
/// update entirely and bump the skip counter. Returns false when skipped.
inline bool optimizer_step(ParamSet& params, const ParamSet& grads, AdamState& s, double lr,
                           const AdamConfig& c = {}) {
  require_shape(params.same_layout(grads) && params.same_layout(s.m) && params.same_layout(s.v),
                "optimizer_step: layout mismatch");
  require(lr >= 0.0 && std::isfinite(lr), "optimizer_step: invalid learning rate");
  if (!grads.all_finite()) {
    ++s.skipped;
    return false;
  }
  ++s.step;
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(s.step));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(s.step));
  auto& pe = params.entries();
  const auto& ge = grads.entries();
  auto& me = s.m.entries();
  auto& ve = s.v.entries();
  for (size_t e = 0; e < pe.size(); ++e) {
    double* p = pe[e].value.data();
    const double* g = ge[e].value.data();
    double* m = me[e].value.data();
    double* v = ve[e].value.data();
    for (Eigen::Index i = 0; i < pe[e].value.size(); ++i) {
      m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g[i];
      v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g[i] * g[i];
      p[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + c.eps);
    }
  }
  return true;
}

/// Scales all gradients so their global L2 norm is at most `max_norm` (no-op if <= 0).
inline double clip_grad_norm(ParamSet& grads, double max_norm) {
  double sq = 0.0;
  for (const auto& e : grads.entries()) sq += e.value.squaredNorm();
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && std::isfinite(norm) && norm > max_norm) {
    const double s = max_norm / norm;
    for (auto& e : grads.entries()) e.value *= s;
  }
  return norm;
}

}  // namespace langsim
